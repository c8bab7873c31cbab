"""Finite-scale property harnesses for the geometric theorems on l_Phi^A(X).

Each harness draws seeded samples, evaluates a margin per sample, and reports
the worst sample so that it can be replayed with :func:`replay_worst_case`.
Modulus-type harnesses (um, opial) pass when the estimated modulus exceeds
``margin_floor``; a positive modulus below the floor is inconclusive.
Assertion-type harnesses pass when no sample violates its inequalities.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .matrix import MatrixKernel, is_triangle
from .orlicz import (MusielakFamily, check_delta2_family, check_star_condition,
                     default_grid)
from .space import (TruncationPolicy, VectorNorm, VectorSequence, luxemburg,
                    membership_diagnostic, modular, section, tail_section)

THEOREMS = ("norm_modular", "um", "opial", "sigma_dc", "order_cont", "ak", "delta2_collapse")
MARGIN_FLOOR = 1e-7


@dataclass(frozen=True)
class SpaceConfig:
    """Family, kernel, vector norm and solver settings for one space."""

    family: MusielakFamily
    kernel: MatrixKernel
    vnorm: VectorNorm = VectorNorm()
    policy: TruncationPolicy = TruncationPolicy()
    tol: float = 1e-10

    def norm(self, x: VectorSequence) -> float:
        return luxemburg(self.family, self.kernel, x, self.vnorm, self.tol, self.policy).norm

    def modular(self, x: VectorSequence, sigma: float = 1.0):
        return modular(self.family, self.kernel, x, self.vnorm, sigma, self.policy)


@dataclass
class GeometryReport:
    theorem_id: str
    samples: int
    epsilon: float | None
    estimated_modulus: float
    worst_case: dict | None
    passed: bool
    status: str
    seed: int | None
    violations: int = 0
    hypotheses: dict = field(default_factory=dict)
    measured: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "theorem_id": self.theorem_id,
            "samples": self.samples,
            "epsilon": self.epsilon,
            "estimated_modulus": self.estimated_modulus,
            "worst_case": self.worst_case,
            "passed": self.passed,
            "status": self.status,
            "seed": self.seed,
            "violations": self.violations,
            "hypotheses": dict(self.hypotheses),
            "measured": dict(self.measured),
            "notes": list(self.notes),
        }


class SequenceSampler:
    """Support indices uniform on [1, max_index], entries standard normal."""

    def __init__(self, seed=0, dim=1, max_index=64, max_support=8):
        self.seed = seed
        self.dim = dim
        self.max_index = max_index
        self.max_support = max_support
        self.rng = np.random.default_rng(seed)

    def sequence(self, nonnegative=False, support=None) -> VectorSequence:
        size = int(self.rng.integers(1, self.max_support + 1)) if support is None else support
        idx = np.sort(self.rng.choice(np.arange(1, self.max_index + 1), size=size, replace=False))
        vals = self.rng.standard_normal((size, self.dim))
        if nonnegative:
            vals = np.abs(vals)
        return VectorSequence(self.dim, idx, vals)


def seq_to_spec(x: VectorSequence):
    return {"dim": x.dim, "entries": [{"index": int(k), "vector": [float(c) for c in v]}
                                      for k, v in zip(x.indices, x.vectors)]}


def seq_from_spec(spec) -> VectorSequence:
    return VectorSequence.from_entries(spec["dim"], [(e["index"], e["vector"]) for e in spec["entries"]])


def _map(fn, items, parallel):
    # results keep the input order, so reductions are schedule-independent
    if parallel and len(items) > 1:
        with ThreadPoolExecutor() as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def family_hypotheses(fam: MusielakFamily, N: int = 128) -> dict:
    """Run the delta_2 and (*) falsifiers with reference constants."""
    out = {}
    sup = fam.sup_exponent()
    logged = fam.kind == "power_log_seq" or (fam.base is not None and fam.base.kind == "power_log")
    if sup is not None and math.isfinite(sup):
        K = 2.0 ** sup * ((math.log(3.0) + 1.0) if logged else 1.0)
        out["delta2"] = check_delta2_family(fam, K, 1.0, 1e-9, N, default_grid(1e2)).status
    else:
        out["delta2"] = "not_checked"
    _, w = check_star_condition(fam, 0.5, N, default_grid(1e2))
    out["star"] = w.status
    return out


def _status(modulus, violations, floor, modulus_type):
    if violations:
        return False, "failed"
    if modulus_type:
        if modulus > floor:
            return True, "passed"
        return False, "inconclusive" if modulus > 0 else "failed"
    return True, "passed"


def _report(theorem, results, epsilon, seed, modulus_type, floor=MARGIN_FLOOR, **extra):
    """results: list of (margin, violated, sample_spec)."""
    if results:
        worst = min(range(len(results)), key=lambda i: results[i][0])
        modulus = float(results[worst][0])
        worst_case = {"sample": results[worst][2], "margin": modulus, "sample_index": worst}
    else:
        modulus, worst_case = math.nan, None
    violations = sum(1 for r in results if r[1])
    passed, status = _status(modulus, violations, floor, modulus_type)
    rep = GeometryReport(theorem, len(results), epsilon, modulus, worst_case, passed, status, seed,
                         violations, **extra)
    if status == "inconclusive":
        rep.notes.append(f"modulus {modulus:.3g} below margin floor {floor:g}")
    return rep


# --- margins (also used for replay) ----------------------------------------


def _margin_um(cfg: SpaceConfig, s):
    x, y = seq_from_spec(s["x"]), seq_from_spec(s["y"])
    return cfg.norm(x + y) - 1.0


def _margin_opial(cfg: SpaceConfig, s):
    return cfg.norm(seq_from_spec(s["block"]) + seq_from_spec(s["fixed_x"])) - 1.0


def _margin_norm_modular(cfg: SpaceConfig, s):
    z = seq_from_spec(s["x"])
    v = cfg.modular(z, 1.0).value
    band = 10 * cfg.tol + cfg.policy.tail_tol
    return band - abs(v - 1.0)


_REPLAY = {"um": _margin_um, "opial": _margin_opial, "norm_modular": _margin_norm_modular}


def replay_worst_case(cfg: SpaceConfig, report: GeometryReport) -> float:
    """Recompute the margin of the reported worst sample."""
    fn = _REPLAY.get(report.theorem_id)
    if fn is None or report.worst_case is None:
        raise PreconditionError(f"no replay available for {report.theorem_id}")
    return fn(cfg, report.worst_case["sample"])


# --- harnesses --------------------------------------------------------------


def check_norm_modular(cfg: SpaceConfig, samples: int = 200, seed: int = 0, ladder: int = 10,
                       delta2_version: bool = False, parallel=False) -> GeometryReport:
    """Unit-norm samples have modular 1 within band = 10 tol + tail_tol, and
    the modular of x / 2^j decreases strictly along the ladder."""
    hyp = {}
    if delta2_version:
        hyp = family_hypotheses(cfg.family)
        if hyp["delta2"] != "pass_on_grid":
            raise PreconditionError("delta_2 version requested but the falsifier did not pass")
    sampler = SequenceSampler(seed, cfg.vnorm.dim)
    xs = [sampler.sequence() for _ in range(samples)]

    def run(x):
        z = x / cfg.norm(x)
        v = cfg.modular(z, 1.0).value
        band = 10 * cfg.tol + cfg.policy.tail_tol
        margin = band - abs(v - 1.0)
        lad = [cfg.modular(z / 2.0 ** j, 1.0).value for j in range(ladder + 1)]
        strict = all(b < a for a, b in zip(lad, lad[1:]))
        return margin, margin < 0 or not strict, {"x": seq_to_spec(z)}, v

    out = _map(run, xs, parallel)
    rep = _report("norm_modular", [o[:3] for o in out], None, seed, False, hypotheses=hyp)
    vals = [o[3] for o in out]
    if vals:
        rep.measured.update(modular_min=min(vals), modular_max=max(vals))
    return rep


def check_uniform_monotonicity(cfg: SpaceConfig, epsilon: float, samples: int = 200, seed: int = 0,
                               exploratory=False, parallel=False) -> GeometryReport:
    """min over nonnegative x, y with ||x|| = 1, ||y|| = epsilon of ||x + y|| - 1.

    ||y|| is set to epsilon exactly: by lattice monotonicity this is the worst
    case among ||y|| >= epsilon, and nested runs are comparable across epsilon.
    """
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    hyp = {"al_space": cfg.vnorm.p == 1.0}
    notes = []
    if not hyp["al_space"]:
        if not exploratory:
            raise PreconditionError("uniform monotonicity needs the l1 vector norm (AL-space)")
        notes.append("hypothesis violated: vector norm is not l1 (exploratory run)")
    sampler = SequenceSampler(seed, cfg.vnorm.dim)
    pairs = [(sampler.sequence(True), sampler.sequence(True)) for _ in range(samples)]

    def run(pair):
        x, y = pair
        x = x / cfg.norm(x)
        y = y * (epsilon / cfg.norm(y))
        s = {"x": seq_to_spec(x), "y": seq_to_spec(y)}
        return _margin_um(cfg, s), False, s

    rep = _report("um", _map(run, pairs, parallel), epsilon, seed, True, hypotheses=hyp, notes=notes)
    if not hyp["al_space"]:
        rep.status = "hypothesis_violated"
    return rep


def opial_blocks(fixed_x: VectorSequence, shifts: int, block_width: int, dim: int, rng=None):
    """Disjoint blocks past the support of fixed_x: the l-th covers
    K + (l-1)B + 1 .. K + lB.  Entries are ones when rng is None."""
    K = fixed_x.max_index if not fixed_x.is_zero else 0
    out = []
    for l in range(1, shifts + 1):
        idx = np.arange(K + (l - 1) * block_width + 1, K + l * block_width + 1)
        vals = np.ones((block_width, dim)) if rng is None else np.abs(rng.standard_normal((block_width, dim)))
        out.append(VectorSequence(dim, idx, vals))
    return out


def check_uniform_opial(cfg: SpaceConfig, epsilon: float, shifts: int, fixed_x: VectorSequence,
                        block_width: int = 1, seed: int | None = None, exploratory=False,
                        parallel=False) -> GeometryReport:
    """Surrogate Opial modulus mu = min_l ||x^(l) + fixed_x|| - 1 over unit
    blocks x^(l) with supports disjoint from each other and from fixed_x."""
    K = (fixed_x.max_index if not fixed_x.is_zero else 0) + shifts * block_width
    hyp = {"triangle": is_triangle(cfg.kernel, K)}
    notes = ["mu is a surrogate estimate from disjoint blocks, not the Opial modulus"]
    if not hyp["triangle"]:
        if not exploratory:
            raise PreconditionError("uniform Opial harness needs a triangle kernel")
        notes.append("hypothesis violated: kernel is not a triangle (exploratory run)")
    nx = cfg.norm(fixed_x)
    if not nx >= epsilon:
        raise PreconditionError(f"||fixed_x|| = {nx:.6g} is below epsilon = {epsilon:g}")
    rng = None if seed is None else np.random.default_rng(seed)
    blocks = opial_blocks(fixed_x, shifts, block_width, fixed_x.dim, rng)
    used = set(int(k) for k in fixed_x.indices)
    disjoint = True
    for b in blocks:
        s = set(int(k) for k in b.indices)
        disjoint &= not (s & used)
        used |= s
    hyp["disjoint_supports"] = disjoint

    def run(b):
        s = {"block": seq_to_spec(b / cfg.norm(b)), "fixed_x": seq_to_spec(fixed_x)}
        return _margin_opial(cfg, s), False, s

    rep = _report("opial", _map(run, blocks, parallel), epsilon, seed, True, hypotheses=hyp, notes=notes)
    if not hyp["triangle"]:
        rep.status = "hypothesis_violated"
    return rep


def check_sigma_dc(cfg: SpaceConfig, samples: int = 100, chain_length: int = 8, seed: int = 0,
                   parallel=False) -> GeometryReport:
    """Increasing nonnegative chains bounded by y: the coordinatewise supremum
    x satisfies x <= y, dominates the chain, and ||x|| <= ||y|| (1 + tol)."""
    sampler = SequenceSampler(seed, cfg.vnorm.dim)
    draws = []
    for _ in range(samples):
        y = sampler.sequence(True)
        frac = np.maximum.accumulate(sampler.rng.uniform(0, 1, (chain_length,) + y.vectors.shape), axis=0)
        draws.append((y, frac))

    def run(d):
        y, frac = d
        chain = [VectorSequence(y.dim, y.indices, y.vectors * f) for f in frac]
        sup = np.max(np.stack([c.dense(y.max_index) for c in chain]), axis=0)
        dense_y = y.dense(y.max_index)
        below = bool(np.all(sup <= dense_y))
        dominates = all(bool(np.all(c.dense(y.max_index) <= sup)) for c in chain)
        x = VectorSequence(y.dim, np.arange(1, y.max_index + 1), sup)
        nx, ny = cfg.norm(x), cfg.norm(y)
        margin = ny * (1 + cfg.tol) + 1e-12 - nx
        return margin, not (below and dominates and margin >= 0), {"y": seq_to_spec(y)}

    return _report("sigma_dc", _map(run, draws, parallel), None, seed, False)


def order_ladder(x: VectorSequence, ladder: int, mode: str = "mixed"):
    """Dominated sequences decreasing to zero: left truncation, halving, or both."""
    K = x.max_index
    cuts = [round(j * K / ladder) for j in range(ladder + 1)]
    if mode == "tail":
        return [tail_section(x, c) for c in cuts]
    if mode == "halve":
        return [x / 2.0 ** j for j in range(ladder + 1)]
    if mode == "mixed":
        return [tail_section(x, c) / 2.0 ** j for j, c in enumerate(cuts)]
    raise PreconditionError(f"unknown ladder mode {mode!r}")


def check_order_continuity(cfg: SpaceConfig, x: VectorSequence | None = None, ladder: int = 10,
                           samples: int = 1, seed: int = 0, modes=("tail", "mixed"),
                           exploratory=False, parallel=False) -> GeometryReport:
    """Norms along each ladder are nonincreasing (within tol) and end at <= 10 tol."""
    sampler = SequenceSampler(seed, cfg.vnorm.dim)
    xs = [x] if x is not None else [sampler.sequence() for _ in range(samples)]
    window = max(s.max_index for s in xs if not s.is_zero) if any(not s.is_zero for s in xs) else 1
    hyp = {"triangle": is_triangle(cfg.kernel, window)}
    if not hyp["triangle"] and not exploratory:
        raise PreconditionError("order continuity harness needs a triangle kernel")
    items = [(s, m) for s in xs for m in modes]

    def run(item):
        s, mode = item
        norms = [cfg.norm(z) for z in order_ladder(s, ladder, mode)]
        mono = min((a * (1 + cfg.tol) - b for a, b in zip(norms, norms[1:])), default=0.0)
        final_margin = 10 * cfg.tol - norms[-1]
        margin = min(mono, final_margin)
        return margin, margin < 0, {"x": seq_to_spec(s), "mode": mode, "final": norms[-1]}

    return _report("order_cont", _map(run, items, parallel), None, seed, False, hypotheses=hyp)


def check_ak(cfg: SpaceConfig, samples: int = 100, seed: int = 0, parallel=False) -> GeometryReport:
    """||x - x|_m|| is nonincreasing in m and exactly 0 once m >= max index."""
    sampler = SequenceSampler(seed, cfg.vnorm.dim)
    xs = [sampler.sequence() for _ in range(samples)]

    def run(x):
        cache = {}
        norms = []
        for m in range(0, x.max_index + 2):
            r = x - section(x, m)
            if r not in cache:
                cache[r] = cfg.norm(r)
            norms.append(cache[r])
        mono = min(a * (1 + cfg.tol) - b for a, b in zip(norms, norms[1:]))
        exact_zero = all(v == 0.0 for v in norms[x.max_index:])
        return mono, mono < 0 or not exact_zero, {"x": seq_to_spec(x)}

    return _report("ak", _map(run, xs, parallel), None, seed, False)


def check_delta2_collapse(cfg: SpaceConfig, samples: int = 50, sigma_grid=(0.1, 1.0, 10.0),
                          seed: int = 0, parallel=False) -> GeometryReport:
    """Every certified l-member is an h-member on the grid.  Samples with an
    uncertified grid point are excluded, not counted as counterexamples."""
    hyp = family_hypotheses(cfg.family)
    sampler = SequenceSampler(seed, cfg.vnorm.dim)
    xs = [sampler.sequence() for _ in range(samples)]

    def run(x):
        rep = membership_diagnostic(cfg.family, cfg.kernel, x, cfg.vnorm, sigma_grid, cfg.policy)
        certified = all(mv.certified for _, mv in rep.evaluations)
        bad = certified and rep.l_member and not rep.h_member_on_grid
        return (0.0 if not bad else -1.0), bad, {"x": seq_to_spec(x), "certified": certified}

    out = _map(run, xs, parallel)
    included = [o for o in out if o[2]["certified"]]
    rep = _report("delta2_collapse", included, None, seed, False, hypotheses=hyp)
    rep.measured["excluded_not_certified"] = len(out) - len(included)
    if hyp.get("delta2") == "violated":
        rep.notes.append("hypothesis violated: delta_2 falsifier flagged the family")
    if not included:
        rep.passed, rep.status = False, "inconclusive"
        rep.notes.append("no sample certified on the sigma grid")
    return rep
