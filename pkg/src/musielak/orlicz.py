"""Orlicz functions, Musielak-Orlicz families and falsifiers for their
structural conditions.

All checkers are *falsifiers*: a ``pass_on_grid`` status certifies the
inequality only at the tested points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _backend
from .errors import DomainError, ValidationError

PASS = "pass_on_grid"
VIOLATED = "violated"

FALSIFIER_NOTE = "falsifier: a pass certifies the inequality on the tested grid only"

# Built-in envelopes are valid (and convex in the row index) for arguments up
# to this value; see MusielakFamily.tail_envelope.
ENVELOPE_U_MAX = 0.5


def tolerance(b):
    """Absolute 1e-12 for values <= 1, relative 1e-12 above."""
    return 1e-12 * np.maximum(1.0, np.abs(b))


def leq(a, b):
    return a <= b + tolerance(b)


def default_grid(t_max=1e4, t_min=1e-8):
    """0 followed by a ratio-2 geometric ladder from ``t_min`` up to ``t_max``."""
    n = int(math.floor(math.log2(t_max / t_min))) + 1
    return [0.0] + [t_min * 2.0**j for j in range(n)]


def _check_argument(t):
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"Orlicz functions are defined on [0, inf), got {t!r}")
    return t


@dataclass(frozen=True)
class OrliczFunction:
    """A single Orlicz function.

    ``evaluator`` maps a float array of nonnegative arguments to values; use
    the constructors rather than building instances directly.
    """

    kind: str
    p: float | None
    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    name: str = ""

    @classmethod
    def power(cls, p):
        p = float(p)
        if not p >= 1:
            raise DomainError(f"exponent must be >= 1, got {p}")
        return cls("power", p, lambda t: np.power(t, p), f"t^{p:g}")

    @classmethod
    def power_log(cls, p):
        p = float(p)
        if not p >= 1:
            raise DomainError(f"exponent must be >= 1, got {p}")
        return cls(
            "power_log",
            p,
            lambda t: np.power(t, p) * (np.log1p(t) + 1.0),
            f"t^{p:g}(ln(1+t)+1)",
        )

    @classmethod
    def custom(cls, fn, name="custom"):
        """Wrap a scalar callable ``fn(t) -> float``."""
        vec = np.vectorize(lambda t: float(fn(float(t))), otypes=[float])
        return cls("custom_pointwise", None, vec, name)

    @classmethod
    def from_table(cls, points, name="table"):
        """Piecewise-linear function through ``(t, phi(t))`` points.

        Beyond the last point the final segment is extended linearly.
        """
        pts = sorted((float(t), float(v)) for t, v in points)
        if len(pts) < 2:
            raise ValidationError("a table needs at least two points")
        ts = np.array([t for t, _ in pts])
        vs = np.array([v for _, v in pts])
        if np.any(np.diff(ts) <= 0):
            raise ValidationError("table abscissae must be distinct")
        slope = (vs[-1] - vs[-2]) / (ts[-1] - ts[-2])

        def evaluator(t):
            t = np.asarray(t, dtype=float)
            out = np.interp(t, ts, vs)
            return np.where(t > ts[-1], vs[-1] + slope * (t - ts[-1]), out)

        return cls("custom_pointwise", None, evaluator, name)

    def values(self, t):
        """Vectorized evaluation without argument checks."""
        return np.asarray(self.evaluator(np.asarray(t, dtype=float)), dtype=float)

    def __call__(self, t):
        return float(self.values(_check_argument(t)))


def evaluate(f: OrliczFunction, t: float) -> float:
    """phi(t); raises DomainError for negative or non-finite t."""
    return f(t)


@dataclass(frozen=True)
class Exponents:
    """The exponent sequence n -> p_n of a power-type family.

    ``formula`` is ``const``, ``one_plus_inv_n`` or ``explicit``; an explicit
    list repeats its last value beyond its length.
    """

    formula: str
    values: tuple = ()

    def __post_init__(self):
        if self.formula not in ("const", "one_plus_inv_n", "explicit"):
            raise ValidationError(f"unknown exponent formula {self.formula!r}", path="formula")
        if self.formula in ("const", "explicit"):
            if not self.values:
                raise ValidationError("exponent values required", path="values")
            for i, p in enumerate(self.values):
                if not (math.isfinite(p) and p >= 1):
                    raise ValidationError(f"exponents must be finite and >= 1, got {p}", path=f"values[{i}]")
        if self.formula == "const" and len(self.values) != 1:
            raise ValidationError("const formula takes one value", path="values")

    @classmethod
    def const(cls, p):
        return cls("const", (float(p),))

    @classmethod
    def explicit(cls, values):
        return cls("explicit", tuple(float(v) for v in values))

    @classmethod
    def one_plus_inv_n(cls):
        return cls("one_plus_inv_n")

    def at(self, n):
        n = np.asarray(n)
        if self.formula == "const":
            return np.full(n.shape, self.values[0])
        if self.formula == "one_plus_inv_n":
            return 1.0 + 1.0 / n
        vals = np.asarray(self.values)
        return vals[np.minimum(n, len(vals)) - 1]

    def sup(self):
        if self.formula == "one_plus_inv_n":
            return 2.0
        return max(self.values)

    def inf_beyond(self, N):
        """inf of p_n over n > N."""
        if self.formula == "const":
            return self.values[0]
        if self.formula == "one_plus_inv_n":
            return 1.0
        tail = self.values[N:]
        return min(tail) if tail else self.values[-1]

    def to_spec(self):
        if self.formula == "one_plus_inv_n":
            return {"formula": self.formula}
        return {"formula": self.formula, "values": list(self.values)}


@dataclass(frozen=True)
class MusielakFamily:
    """An indexed family (phi_n) of Orlicz functions.

    ``constant`` and ``custom`` families use ``base`` for every n;
    ``power_seq`` and ``power_log_seq`` use ``exponents``.
    """

    kind: str
    exponents: Exponents | None = None
    base: OrliczFunction | None = None

    @classmethod
    def constant(cls, phi: OrliczFunction | float):
        if not isinstance(phi, OrliczFunction):
            phi = OrliczFunction.power(phi)
        return cls("constant", base=phi)

    @classmethod
    def power_seq(cls, exponents: Exponents | Sequence[float] | float):
        return cls("power_seq", exponents=_as_exponents(exponents))

    @classmethod
    def power_log_seq(cls, exponents: Exponents | Sequence[float] | float):
        return cls("power_log_seq", exponents=_as_exponents(exponents))

    @classmethod
    def custom(cls, phi: OrliczFunction, grid=None):
        """A constant family built from an arbitrary function.

        The function must pass :func:`check_convexity_monotonicity` on
        ``grid`` (default :func:`default_grid`).
        """
        w = check_convexity_monotonicity(phi, default_grid() if grid is None else grid)
        if not w.passed:
            raise ValidationError(
                f"custom Orlicz function fails the convexity/monotonicity gate at t={w.violating_point}"
            )
        return cls("custom", base=phi)

    def member(self, n: int) -> OrliczFunction:
        if n < 1:
            raise DomainError("family index starts at 1")
        if self.kind in ("constant", "custom"):
            return self.base
        p = float(self.exponents.at(n))
        if self.kind == "power_seq":
            return OrliczFunction.power(p)
        return OrliczFunction.power_log(p)

    def values(self, n, u):
        """phi_n(u), broadcasting ``n`` (ints >= 1) against ``u``."""
        u = np.asarray(u, dtype=float)
        if self.kind in ("constant", "custom"):
            return self.base.values(np.broadcast_to(u, np.broadcast(np.asarray(n), u).shape))
        p = self.exponents.at(n)
        with np.errstate(over="ignore"):
            out = np.power(u, p)
            if self.kind == "power_log_seq":
                out = out * (np.log1p(u) + 1.0)
        return out

    def kernel_code(self):
        """(kind code, exponent getter) for the compiled modular kernel, or None."""
        if self.kind == "power_seq":
            return _backend.POWER, self.exponents.at
        if self.kind == "power_log_seq":
            return _backend.POWER_LOG, self.exponents.at
        if self.kind == "constant" and self.base.kind in ("power", "power_log"):
            p = self.base.p
            code = _backend.POWER if self.base.kind == "power" else _backend.POWER_LOG
            return code, lambda n: np.full(np.shape(n), p)
        return None

    def tail_envelope(self, N):
        """Power terms bounding phi_n for every n > N.

        Returns ``[(coef, q), ...]`` with ``phi_n(u) <= sum coef * u**q`` for
        ``0 <= u <= ENVELOPE_U_MAX``; the sum is convex in the row index for
        row images of the form c/(n + shift).  None when no envelope is known.
        """
        if self.kind in ("custom",):
            return None
        if self.kind == "constant":
            if self.base.kind == "power":
                return [(1.0, self.base.p)]
            if self.base.kind == "power_log":
                return _power_log_envelope(self.base.p)
            return None
        q = self.exponents.inf_beyond(N)
        if self.kind == "power_seq":
            return [(1.0, q)]
        return _power_log_envelope(q)

    def sup_exponent(self):
        if self.kind in ("constant",) and self.base.p is not None:
            return self.base.p
        if self.exponents is not None:
            return self.exponents.sup()
        return None

    def to_spec(self):
        if self.kind == "constant" and self.base.kind == "power":
            return {"kind": "constant", "p": self.base.p}
        if self.kind == "constant" and self.base.kind == "power_log":
            return {"kind": "power_log", "p_seq": {"formula": "const", "values": [self.base.p]}}
        if self.kind in ("power_seq", "power_log_seq"):
            return {"kind": "power" if self.kind == "power_seq" else "power_log",
                    "p_seq": self.exponents.to_spec()}
        return {"kind": "custom", "name": self.base.name}


def _as_exponents(e):
    if isinstance(e, Exponents):
        return e
    if np.isscalar(e):
        return Exponents.const(e)
    return Exponents.explicit(e)


def _power_log_envelope(q):
    # u^p (1 + ln(1+u)) <= u^q (1 + u - u^2/2 + u^3/3) for u <= 1, p >= q
    return [(1.0, q), (1.0, q + 1), (-0.5, q + 2), (1.0 / 3.0, q + 3)]


@dataclass(frozen=True)
class ConditionWitness:
    status: str
    violating_index: int | None = None
    violating_point: float | None = None
    parameters: dict = field(default_factory=dict)
    reason: str = ""
    note: str = FALSIFIER_NOTE

    @property
    def passed(self):
        return self.status == PASS

    def to_dict(self):
        return {
            "status": self.status,
            "violating_index": self.violating_index,
            "violating_point": self.violating_point,
            "parameters": dict(self.parameters),
            "reason": self.reason,
            "note": self.note,
        }


def _violated(reason, t=None, n=None, **params):
    return ConditionWitness(VIOLATED, n, None if t is None else float(t), params, reason)


def check_convexity_monotonicity(f: OrliczFunction, grid) -> ConditionWitness:
    """Positivity, monotonicity and midpoint convexity of ``f`` on ``grid``.

    For every adjacent triple (a, b, c) both the midpoint inequality at
    (a + c)/2 and the chord inequality at b are tested.
    """
    g = np.asarray(grid, dtype=float)
    if g.size == 0:
        raise DomainError("empty grid")
    if g.size < 3:
        raise DomainError("grid needs at least 3 points")
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise DomainError("grid points must be finite and nonnegative")
    if np.any(np.diff(g) < 0):
        raise DomainError("grid must be sorted ascending")
    v = f.values(g)
    zero = float(f.values(np.array([0.0]))[0])
    if zero != 0.0:
        return _violated("phi(0) != 0", 0.0)
    pos = g > 0
    bad = np.nonzero(pos & ~(v > 0))[0]
    if bad.size:
        return _violated("phi(t) > 0 fails for t > 0", g[bad[0]])
    for i in range(len(g) - 1):
        if not leq(v[i], v[i + 1]):
            return _violated("phi is not nondecreasing", g[i + 1])
    for i in range(1, len(g) - 1):
        a, b, c = g[i - 1], g[i], g[i + 1]
        mid = 0.5 * (a + c)
        fm = float(f.values(np.array([mid]))[0])
        if not leq(fm, 0.5 * (v[i - 1] + v[i + 1])):
            return _violated("midpoint convexity fails", mid)
        if c > a:
            chord = v[i - 1] + (v[i + 1] - v[i - 1]) * (b - a) / (c - a)
            if not leq(v[i], chord):
                return _violated("convexity (chord) fails", b)
    return ConditionWitness(PASS, parameters={"grid_size": int(g.size)})


def check_superadditive(f: OrliczFunction, pairs) -> ConditionWitness:
    """phi(u + v) >= phi(u) + phi(v) on the given pairs."""
    for u, v in pairs:
        u = _check_argument(u)
        v = _check_argument(v)
        lhs = f(u + v)
        rhs = f(u) + f(v)
        if lhs < rhs - tolerance(rhs):
            return _violated("superadditivity fails", u, u=u, v=v, lhs=lhs, rhs=rhs)
    return ConditionWitness(PASS, parameters={"pairs": len(pairs)})


def check_delta2_zero(f: OrliczFunction, K: float, t0: float, grid_size: int = 64) -> ConditionWitness:
    """phi(2t) <= K phi(t) on the ratio-2 ladder t0, t0/2, ... (grid_size points)."""
    if not (K > 0 and t0 > 0):
        raise DomainError("K and t0 must be positive")
    t = t0 * np.power(0.5, np.arange(grid_size))
    lhs = f.values(2 * t)
    rhs = K * f.values(t)
    bad = np.nonzero(~leq(lhs, rhs))[0]
    params = {"K": float(K), "t0": float(t0), "grid_size": int(grid_size)}
    if bad.size:
        i = bad[0]
        return _violated("phi(2t) > K phi(t)", t[i], **params)
    return ConditionWitness(PASS, parameters=params)


def check_delta2_family(fam: MusielakFamily, K: float, delta: float, c_l1_bound: float,
                        N: int, grid, beta: float = 2.0) -> ConditionWitness:
    """Decide the delta_2 condition on n <= N and the grid.

    The smallest admissible correction c_n is the per-n maximum of
    ``phi_n(beta x) - K phi_n(x)`` over grid points with ``phi_n(x) <= delta``;
    the family passes when the sum of these does not exceed ``c_l1_bound``.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    x = np.asarray(grid, dtype=float)
    n = np.arange(1, N + 1)[:, None]
    px = fam.values(n, x[None, :])
    pbx = fam.values(n, beta * x[None, :])
    slack = pbx - K * px
    slack = np.where((px <= delta) & (slack > tolerance(K * px)), slack, 0.0)
    c = slack.max(axis=1) if x.size else np.zeros(N)
    total = math.fsum(c)
    params = {"K": float(K), "delta": float(delta), "beta": float(beta), "N": int(N),
              "c_sum": total, "c_l1_bound": float(c_l1_bound)}
    if total > c_l1_bound + tolerance(c_l1_bound):
        i, j = np.unravel_index(np.argmax(slack), slack.shape)
        return _violated("sum of required corrections c_n exceeds the l1 bound",
                         x[j], int(i + 1), slack=float(slack[i, j]), **params)
    return ConditionWitness(PASS, parameters=params)


def check_star_condition(fam: MusielakFamily, epsilon: float, N: int, grid):
    """Largest delta in (0, 1] with phi_n(u) < 1 - eps => phi_n((1+delta) u) <= 1.

    Returns ``(delta_estimate, witness)``.
    """
    if not 0 < epsilon < 1:
        raise DomainError("epsilon must lie in (0, 1)")
    u = np.asarray(grid, dtype=float)
    n = np.arange(1, N + 1)[:, None]
    mask = fam.values(n, u[None, :]) < 1 - epsilon

    def ok(d):
        vals = fam.values(n, (1 + d) * u[None, :])
        return bool(np.all(leq(vals[mask], 1.0)))

    params = {"epsilon": float(epsilon), "N": int(N)}
    if ok(1.0):
        return 1.0, ConditionWitness(PASS, parameters={**params, "delta": 1.0})
    floor = 1e-9
    if not ok(floor):
        vals = fam.values(n, (1 + floor) * u[None, :])
        bad = mask & ~leq(vals, 1.0)
        i, j = np.argwhere(bad)[0]
        return 0.0, _violated("no delta >= 1e-9 works", u[j], int(i + 1), **params)
    lo, hi = floor, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo, ConditionWitness(PASS, parameters={**params, "delta": lo})
