"""Command-line entry point.

Every command prints a result envelope
``{"command", "config_digest", "outputs", "warnings"}``; warnings are also
written to stderr.  Exit status: 0 success, 2 usage, 3 validation,
4 computation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import geometry, snumbers
from .config import (RunConfig, load_config, load_json_file, parse_operator,
                     parse_sequence)
from .errors import MusielakError, UsageError, ValidationError
from .matrix import estimate_condition_M, in_class_A, is_triangle
from .space import VectorSequence, luxemburg, modular, rearrangement

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_COMPUTATION = 0, 2, 3, 4

THEOREM_FLAGS = {
    "norm-modular": "norm_modular", "um": "um", "opial": "opial", "sigma-dc": "sigma_dc",
    "order-cont": "order_cont", "ak": "ak", "delta2-collapse": "delta2_collapse",
}
SUITES = ("s-axioms", "qn-axioms", "ideal-axioms", "h-closed", "inclusion")


@dataclass
class ResultEnvelope:
    command: str
    config_digest: str
    outputs: dict
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {"command": self.command, "config_digest": self.config_digest,
                "outputs": self.outputs, "warnings": list(self.warnings)}


# --- serialization ----------------------------------------------------------


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def format_float(v: float) -> str:
    """17 significant digits (bit-exact round trip); non-finite values become null."""
    if not math.isfinite(v):
        return "null"
    s = format(v, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def dumps(obj) -> str:
    """Deterministic JSON with sorted keys and 17-digit floats."""
    obj = _plain(obj)

    def enc(o):
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, float):
            return format_float(o)
        if isinstance(o, (int, str)):
            return json.dumps(o)
        if isinstance(o, list):
            return "[" + ",".join(enc(v) for v in o) + "]"
        if isinstance(o, dict):
            return "{" + ",".join(json.dumps(k) + ":" + enc(o[k]) for k in sorted(o)) + "}"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj)


def _flatten(obj, prefix=""):
    out = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.update(_flatten(v, f"{prefix}.{k}" if prefix else str(k)))
    else:
        out[prefix] = obj
    return out


def _cell(v):
    if isinstance(v, float):
        return "" if not math.isfinite(v) else format_float(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (list, dict)):
        return dumps(v)
    return str(v)


def emit_table(results, fmt: str = "json") -> bytes:
    """JSON array of envelopes, or CSV of the flattened outputs with columns
    in lexicographic order.  All envelopes must share one command."""
    results = list(results)
    if len({r.command for r in results}) > 1:
        raise UsageError("cannot tabulate results of different commands")
    if fmt == "json":
        return ("[" + ",".join(dumps(r.to_dict()) for r in results) + "]\n").encode()
    if fmt != "csv":
        raise UsageError(f"unknown format {fmt!r}")
    rows = [_flatten(_plain(r.outputs)) for r in results]
    cols = sorted(set().union(*rows)) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in cols])
    return buf.getvalue().encode()


# --- commands ----------------------------------------------------------------


def _sequence(args, cfg: RunConfig):
    return parse_sequence(load_json_file(args.input), cfg.vector_norm())


def cmd_norm(args, cfg):
    x, vn = _sequence(args, cfg)
    res = luxemburg(cfg.family(), cfg.kernel(), x, vn, cfg.tol, cfg.policy())
    out = res.to_dict()
    out["tail_estimate"] = res.tail_estimate
    out["postcondition_ok"] = res.postcondition_ok
    warnings = list(res.warnings)
    if not res.postcondition_ok:
        warnings.append("norm postcondition failed at the returned sigma")
    return out, warnings


def cmd_modular(args, cfg):
    x, vn = _sequence(args, cfg)
    mv = modular(cfg.family(), cfg.kernel(), x, vn, args.sigma, cfg.policy())
    warnings = [] if mv.certified else [f"tail not certified at {mv.rows_used} rows"]
    return {"sigma": args.sigma, **mv.to_dict()}, warnings


def cmd_rearrange(args, cfg):
    x, vn = _sequence(args, cfg)
    r = rearrangement(x, vn)
    return {"values": [float(v[0]) for v in r.vectors], "support_size": len(r.indices)}, []


def cmd_snumbers(args, cfg):
    T = parse_operator(load_json_file(args.matrix))
    s = T.s_numbers
    return {"s_numbers": s.tolist(), "rank": s.rank(), "operator_norm": snumbers.operator_norm(T)}, []


def cmd_ideal_norm(args, cfg):
    T = parse_operator(load_json_file(args.matrix))
    res = snumbers.ideal_quasi_norm_result(cfg.family(), cfg.kernel(), T, cfg.tol, cfg.policy())
    return res.to_dict(), list(res.warnings)


def cmd_matrix_m(args, cfg):
    A = cfg.kernel()
    rep = estimate_condition_M(A, args.rows, args.cols)
    out = rep.to_dict()
    cls = in_class_A(A, args.rows, args.cols)
    out["class_A_on_window"] = cls.member_on_window
    out["triangle_on_window"] = is_triangle(A, min(args.rows, args.cols))
    warnings = [f"window-relative check on {args.rows}x{args.cols}"]
    if rep.violated:
        warnings.append("condition on A violated on the window")
    return out, warnings


def _geometry_report(args, cfg, epsilon):
    sc = cfg.space()
    seed = cfg.seed if args.seed is None else args.seed
    thm = THEOREM_FLAGS[args.theorem]
    n = args.samples
    par = args.parallel
    if thm == "norm_modular":
        return geometry.check_norm_modular(sc, n, seed, parallel=par)
    if thm == "um":
        return geometry.check_uniform_monotonicity(sc, epsilon, n, seed, args.exploratory, par)
    if thm == "opial":
        if args.input:
            fx, _ = parse_sequence(load_json_file(args.input), sc.vnorm)
        else:
            fx = VectorSequence.from_entries(sc.vnorm.dim, [(1, [1.0] + [0.0] * (sc.vnorm.dim - 1))])
        return geometry.check_uniform_opial(sc, epsilon, args.shifts, fx, args.block_width,
                                            seed if args.block_width > 1 else None,
                                            args.exploratory, par)
    if thm == "sigma_dc":
        return geometry.check_sigma_dc(sc, n, args.chain_length, seed, par)
    if thm == "order_cont":
        return geometry.check_order_continuity(sc, None, args.ladder, n, seed,
                                               exploratory=args.exploratory, parallel=par)
    if thm == "ak":
        return geometry.check_ak(sc, n, seed, par)
    return geometry.check_delta2_collapse(sc, n, tuple(args.sigma_grid), seed, par)


def _suite_report(args, cfg):
    seed = cfg.seed if args.seed is None else args.seed
    sampler = snumbers.OperatorSampler(seed, (args.dim, args.dim))
    fam, A, pol, tol = cfg.family(), cfg.kernel(), cfg.policy(), cfg.tol
    if args.suite == "s-axioms":
        rep = snumbers.SuiteReport("s-axioms", seed=seed)
        for _ in range(args.samples):
            S, T, R, Q = (sampler.operator() for _ in range(4))
            snumbers.check_s_axioms(S, T, R, Q, report=rep)
        return rep.to_dict(), rep.warnings
    if args.suite == "qn-axioms":
        rep = snumbers.check_quasi_norm_axioms(fam, A, sampler, args.samples, tol, pol)
    elif args.suite == "ideal-axioms":
        rep = snumbers.check_ideal_axioms(fam, A, sampler, args.samples, tol, pol)
    elif args.suite == "h-closed":
        rep = snumbers.check_H_closed(fam, A, sampler, args.samples, tuple(args.sigma_grid), tol, pol)
    else:
        return snumbers.inclusion_constant(fam, A, sampler, args.samples, tol, pol), []
    return rep.to_dict(), rep.warnings


def _geometry_warnings(rep):
    w = []
    if rep.status in ("inconclusive", "hypothesis_violated"):
        w.append(f"{rep.theorem_id}: status {rep.status}")
    w.extend(n for n in rep.notes if "hypothesis" in n or "no sample" in n)
    hyp = {k: v for k, v in rep.hypotheses.items() if v in (False, "violated")}
    if hyp:
        w.append(f"hypotheses not met: {sorted(hyp)}")
    return w


def run_check(args, cfg) -> list:
    """One (outputs, warnings) pair per requested epsilon."""
    if bool(args.theorem) == bool(args.suite):
        raise UsageError("check needs exactly one of --theorem or --suite")
    if args.suite:
        return [_suite_report(args, cfg)]
    eps = args.epsilon or [0.5]
    out = []
    for e in eps:
        rep = _geometry_report(args, cfg, e)
        out.append((rep.to_dict(), _geometry_warnings(rep)))
    return out


COMMANDS = {
    "norm": cmd_norm, "modular": cmd_modular, "rearrange": cmd_rearrange,
    "snumbers": cmd_snumbers, "ideal-norm": cmd_ideal_norm, "matrix-m": cmd_matrix_m,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="musielak", description="Musielak-Orlicz sequence spaces: norms, s-numbers, checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, with_format=False):
        sp.add_argument("--config", help="JSON run configuration")
        if with_format:
            sp.add_argument("--format", choices=("json", "csv"), default="json")
        return sp

    for name, helptext in (("norm", "Luxemburg norm of a sequence"), ("rearrange", "nonincreasing rearrangement")):
        sp = common(sub.add_parser(name, help=helptext), True)
        sp.add_argument("input", help="sequence JSON")
    sp = common(sub.add_parser("modular", help="modular at a scale sigma"), True)
    sp.add_argument("input")
    sp.add_argument("--sigma", type=float, default=1.0)
    for name in ("snumbers", "ideal-norm"):
        sp = common(sub.add_parser(name, help="s-numbers of an operator" if name == "snumbers"
                                   else "s-type quasi-norm of an operator"), True)
        sp.add_argument("--matrix", required=True, help="operator JSON")
    sp = common(sub.add_parser("matrix-m", help="window estimate of the constant M"), True)
    sp.add_argument("--rows", type=int, default=64)
    sp.add_argument("--cols", type=int, default=32)

    sp = common(sub.add_parser("check", help="run a property harness or axiom suite"), True)
    sp.add_argument("--theorem", choices=sorted(THEOREM_FLAGS))
    sp.add_argument("--suite", choices=SUITES)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--epsilon", type=float, action="append")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--parallel", action="store_true")
    sp.add_argument("--exploratory", action="store_true", help="run even if a hypothesis fails")
    sp.add_argument("--shifts", type=int, default=8)
    sp.add_argument("--block-width", type=int, default=1)
    sp.add_argument("--chain-length", type=int, default=8)
    sp.add_argument("--ladder", type=int, default=10)
    sp.add_argument("--dim", type=int, default=8, help="operator size for the suites")
    sp.add_argument("--sigma-grid", type=float, nargs="+", default=[0.1, 1.0, 10.0])
    sp.add_argument("input", nargs="?", help="fixed_x sequence JSON (opial)")
    return p


def _error_object(exc):
    details = {k: v for k, v in getattr(exc, "details", {}).items() if v is not None}
    return {"error": {"kind": getattr(exc, "kind", "computation"), "message": str(exc),
                      "details": details}}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.config)
        if args.command == "check":
            pairs = run_check(args, cfg)
        else:
            pairs = [COMMANDS[args.command](args, cfg)]
        digest = cfg.digest()
        envs = [ResultEnvelope(args.command, digest, _plain(o), list(w)) for o, w in pairs]
        for e in envs:
            for w in e.warnings:
                print(f"warning: {w}", file=stderr)
        if len(envs) == 1 and args.format == "json":
            stdout.write(dumps(envs[0].to_dict()) + "\n")
        else:
            stdout.write(emit_table(envs, args.format).decode())
        return EXIT_OK
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except MusielakError as exc:
        code = {UsageError: EXIT_USAGE, ValidationError: EXIT_VALIDATION}.get(type(exc), EXIT_COMPUTATION)
        stdout.write(dumps(_error_object(exc)) + "\n")
        print(f"error ({exc.kind}): {exc}", file=stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
