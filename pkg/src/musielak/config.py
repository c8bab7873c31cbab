"""Run configuration: JSON schema, validation with field paths, canonical
serialization, and builders for the library objects.

A config is normalized on parsing (defaults filled in), so
``parse(serialize(cfg)) == cfg`` and the digest does not depend on which
optional fields were spelled out.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from .errors import ValidationError
from .geometry import SpaceConfig
from .matrix import KINDS as MATRIX_KINDS
from .matrix import MatrixKernel
from .orlicz import Exponents, MusielakFamily, OrliczFunction
from .space import TAIL_MODELS, TruncationPolicy, VectorNorm, VectorSequence

FAMILY_KINDS = ("power", "power_log", "constant", "custom")
P_FORMULAS = ("const", "one_plus_inv_n", "explicit")
SEED_MAX = 2 ** 64 - 1

DEFAULTS = {
    "family": {"kind": "power", "p_seq": {"formula": "const", "values": [2.0]}},
    "matrix": {"kind": "identity"},
    "vector_norm": {"dim": 1, "lp": 1.0},
    "truncation": {"max_rows": 1_000_000, "tail_tol": 1e-2, "tail_model": "integral_comparison"},
    "solver": {"tol": 1e-10},
    "seed": 0,
}


def _num(v, path, positive=False, nonneg=False, minimum=None):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ValidationError("expected a finite number", path=path)
    v = float(v)
    if positive and not v > 0:
        raise ValidationError("must be positive", path=path)
    if nonneg and v < 0:
        raise ValidationError("must be nonnegative", path=path)
    if minimum is not None and v < minimum:
        raise ValidationError(f"must be >= {minimum:g}", path=path)
    return v


def _int(v, path, minimum=0, maximum=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError("expected an integer", path=path)
    if v < minimum or (maximum is not None and v > maximum):
        raise ValidationError(f"out of range [{minimum}, {maximum}]", path=path)
    return v


def _obj(v, path, allowed):
    if not isinstance(v, dict):
        raise ValidationError("expected an object", path=path)
    extra = sorted(set(v) - set(allowed))
    if extra:
        raise ValidationError(f"unknown field {extra[0]!r}", path=f"{path}.{extra[0]}" if path else extra[0])
    return v


def _list(v, path):
    if not isinstance(v, list):
        raise ValidationError("expected an array", path=path)
    return v


def normalize_family(spec, path="family"):
    _obj(spec, path, ("kind", "p", "p_seq", "table"))
    kind = spec.get("kind")
    if kind not in FAMILY_KINDS:
        raise ValidationError(f"kind must be one of {list(FAMILY_KINDS)}", path=f"{path}.kind")
    if kind == "constant":
        return {"kind": kind, "p": _num(spec.get("p"), f"{path}.p", minimum=1.0)}
    if kind == "custom":
        table = _list(spec.get("table"), f"{path}.table")
        pts = []
        for i, row in enumerate(table):
            row = _list(row, f"{path}.table[{i}]")
            if len(row) != 2:
                raise ValidationError("expected a [t, phi(t)] pair", path=f"{path}.table[{i}]")
            pts.append([_num(row[0], f"{path}.table[{i}][0]", nonneg=True),
                        _num(row[1], f"{path}.table[{i}][1]", nonneg=True)])
        if len(pts) < 3:
            raise ValidationError("need at least 3 points", path=f"{path}.table")
        return {"kind": kind, "table": pts}
    if "p_seq" not in spec and "p" in spec:
        p = _num(spec["p"], f"{path}.p", minimum=1.0)
        return {"kind": kind, "p_seq": {"formula": "const", "values": [p]}}
    ps = _obj(spec.get("p_seq"), f"{path}.p_seq", ("formula", "values"))
    formula = ps.get("formula")
    if formula not in P_FORMULAS:
        raise ValidationError(f"formula must be one of {list(P_FORMULAS)}", path=f"{path}.p_seq.formula")
    values = [_num(v, f"{path}.p_seq.values[{i}]", minimum=1.0)
              for i, v in enumerate(_list(ps.get("values", []), f"{path}.p_seq.values"))]
    if formula == "const" and len(values) != 1:
        raise ValidationError("const formula takes exactly one value", path=f"{path}.p_seq.values")
    if formula == "explicit" and not values:
        raise ValidationError("explicit formula needs values", path=f"{path}.p_seq.values")
    if formula == "one_plus_inv_n":
        values = []
    return {"kind": kind, "p_seq": {"formula": formula, "values": values}}


def normalize_matrix(spec, path="matrix"):
    _obj(spec, path, ("kind", "weights", "p", "q", "table"))
    kind = spec.get("kind")
    if kind not in MATRIX_KINDS:
        raise ValidationError(f"kind must be one of {list(MATRIX_KINDS)}", path=f"{path}.kind")
    out = {"kind": kind}
    if kind == "norlund":
        out["weights"] = [_num(w, f"{path}.weights[{i}]", nonneg=True)
                          for i, w in enumerate(_list(spec.get("weights"), f"{path}.weights"))]
        if not out["weights"] or not out["weights"][0] > 0:
            raise ValidationError("first weight must be positive", path=f"{path}.weights[0]")
    elif kind == "lorentz_diag":
        out["p"] = _num(spec.get("p"), f"{path}.p", positive=True)
        out["q"] = _num(spec.get("q"), f"{path}.q", positive=True)
    elif kind == "custom_table":
        rows = _list(spec.get("table"), f"{path}.table")
        out["table"] = [[_num(v, f"{path}.table[{i}][{j}]") for j, v in enumerate(_list(r, f"{path}.table[{i}]"))]
                        for i, r in enumerate(rows)]
        if not out["table"] or any(len(r) != len(out["table"][0]) for r in out["table"]) or not out["table"][0]:
            raise ValidationError("table must be a nonempty rectangular array", path=f"{path}.table")
    return out


def _lp(v, path):
    if v == "inf":
        return "inf"
    return _num(v, path, minimum=1.0)


def normalize_vector_norm(spec, path="vector_norm"):
    _obj(spec, path, ("dim", "lp"))
    return {"dim": _int(spec.get("dim", 1), f"{path}.dim", minimum=1),
            "lp": _lp(spec.get("lp", 1.0), f"{path}.lp")}


def normalize_truncation(spec, path="truncation"):
    _obj(spec, path, ("max_rows", "tail_tol", "tail_model"))
    d = DEFAULTS["truncation"]
    model = spec.get("tail_model", d["tail_model"])
    if model not in TAIL_MODELS:
        raise ValidationError(f"tail_model must be one of {list(TAIL_MODELS)}", path=f"{path}.tail_model")
    return {"max_rows": _int(spec.get("max_rows", d["max_rows"]), f"{path}.max_rows", minimum=1),
            "tail_tol": _num(spec.get("tail_tol", d["tail_tol"]), f"{path}.tail_tol", positive=True),
            "tail_model": model}


@dataclass(frozen=True)
class RunConfig:
    """A validated, normalized configuration."""

    data: dict = field(default_factory=lambda: parse_config({}).data)

    def __eq__(self, other):
        return isinstance(other, RunConfig) and canonical_json(self.data) == canonical_json(other.data)

    def __hash__(self):
        return hash(canonical_json(self.data))

    @property
    def seed(self) -> int:
        return self.data["seed"]

    @property
    def tol(self) -> float:
        return self.data["solver"]["tol"]

    def family(self) -> MusielakFamily:
        return build_family(self.data["family"])

    def kernel(self) -> MatrixKernel:
        return build_matrix(self.data["matrix"])

    def vector_norm(self) -> VectorNorm:
        return build_vector_norm(self.data["vector_norm"])

    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(**self.data["truncation"])

    def space(self) -> SpaceConfig:
        return SpaceConfig(self.family(), self.kernel(), self.vector_norm(), self.policy(), self.tol)

    def with_seed(self, seed):
        return parse_config({**self.data, "seed": seed})

    def serialize(self) -> str:
        return canonical_json(self.data)

    def digest(self) -> str:
        return config_digest(self)


def parse_config(obj) -> RunConfig:
    """Validate a decoded JSON object and fill in defaults."""
    _obj(obj, "", tuple(DEFAULTS))
    data = {
        "family": normalize_family(obj.get("family", DEFAULTS["family"])),
        "matrix": normalize_matrix(obj.get("matrix", DEFAULTS["matrix"])),
        "vector_norm": normalize_vector_norm(obj.get("vector_norm", DEFAULTS["vector_norm"])),
        "truncation": normalize_truncation(obj.get("truncation", {})),
        "solver": {"tol": _num(_obj(obj.get("solver", {}), "solver", ("tol",)).get("tol", 1e-10),
                               "solver.tol", positive=True)},
        "seed": _int(obj.get("seed", 0), "seed", 0, SEED_MAX),
    }
    # building catches semantic problems (e.g. a non-convex custom table)
    build_family(data["family"])
    build_matrix(data["matrix"])
    return RunConfig(data)


def loads_json(text, source="<config>"):
    """json.loads with the source path and line in the error."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}",
                              path=source, line=exc.lineno) from None


def load_json_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read file: {exc.strerror}", path=str(path)) from None
    return loads_json(text, str(path))


def load_config(path=None) -> RunConfig:
    return parse_config({} if path is None else load_json_file(path))


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_digest(cfg: RunConfig) -> str:
    return hashlib.sha256(canonical_json(cfg.data).encode()).hexdigest()


# --- builders ---------------------------------------------------------------


def build_family(spec) -> MusielakFamily:
    kind = spec["kind"]
    if kind == "constant":
        return MusielakFamily.constant(OrliczFunction.power(spec["p"]))
    if kind == "custom":
        try:
            return MusielakFamily.custom(OrliczFunction.from_table([tuple(r) for r in spec["table"]]))
        except ValidationError as exc:
            raise ValidationError(str(exc), path="family.table") from None
    ps = spec["p_seq"]
    ex = {"const": lambda: Exponents.const(ps["values"][0]),
          "one_plus_inv_n": Exponents.one_plus_inv_n,
          "explicit": lambda: Exponents.explicit(ps["values"])}[ps["formula"]]()
    return MusielakFamily.power_seq(ex) if kind == "power" else MusielakFamily.power_log_seq(ex)


def build_matrix(spec) -> MatrixKernel:
    kind = spec["kind"]
    if kind == "norlund":
        return MatrixKernel.norlund(spec["weights"])
    if kind == "lorentz_diag":
        return MatrixKernel.lorentz_diag(spec["p"], spec["q"])
    if kind == "custom_table":
        return MatrixKernel.custom_table(spec["table"])
    return MatrixKernel(kind)


def build_vector_norm(spec) -> VectorNorm:
    return VectorNorm(spec["dim"], math.inf if spec["lp"] == "inf" else spec["lp"])


def parse_sequence(obj, default_norm: VectorNorm | None = None, path="sequence"):
    """{"dim", "vector_norm": {"lp"}, "entries": [{"index", "vector"}]} ->
    (VectorSequence, VectorNorm).  A vector_norm in the file overrides the
    config's; its dim must match."""
    _obj(obj, path, ("dim", "vector_norm", "entries"))
    dim = _int(obj.get("dim"), f"{path}.dim", minimum=1)
    vn = default_norm or VectorNorm(dim, 1.0)
    if "vector_norm" in obj:
        spec = _obj(obj["vector_norm"], f"{path}.vector_norm", ("lp", "dim"))
        lp = _lp(spec.get("lp", 1.0), f"{path}.vector_norm.lp")
        vn = VectorNorm(dim, math.inf if lp == "inf" else lp)
    if vn.dim != dim:
        raise ValidationError(f"sequence dim {dim} differs from vector norm dim {vn.dim}", path=f"{path}.dim")
    entries, seen = [], set()
    for i, e in enumerate(_list(obj.get("entries", []), f"{path}.entries")):
        p = f"{path}.entries[{i}]"
        _obj(e, p, ("index", "vector"))
        k = _int(e.get("index"), f"{p}.index", minimum=1)
        if k in seen:
            raise ValidationError("duplicate index", path=f"{p}.index")
        seen.add(k)
        vec = [_num(v, f"{p}.vector[{j}]") for j, v in enumerate(_list(e.get("vector"), f"{p}.vector"))]
        if len(vec) != dim:
            raise ValidationError(f"expected {dim} components", path=f"{p}.vector")
        entries.append((k, vec))
    entries.sort()
    return VectorSequence.from_entries(dim, entries), vn


def parse_operator(obj, path="operator"):
    from .snumbers import FiniteOperator

    _obj(obj, path, ("rows", "cols", "entries"))
    m = _int(obj.get("rows"), f"{path}.rows", minimum=1)
    n = _int(obj.get("cols"), f"{path}.cols", minimum=1)
    rows = _list(obj.get("entries"), f"{path}.entries")
    if len(rows) != m:
        raise ValidationError(f"expected {m} rows", path=f"{path}.entries")
    data = []
    for i, r in enumerate(rows):
        r = _list(r, f"{path}.entries[{i}]")
        if len(r) != n:
            raise ValidationError(f"expected {n} columns", path=f"{path}.entries[{i}]")
        data.append([_num(v, f"{path}.entries[{i}][{j}]") for j, v in enumerate(r)])
    return FiniteOperator(data)
