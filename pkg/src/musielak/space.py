"""Finite-support vector sequences, the modular and the Luxemburg norm.

For x = (x_k) with values in (R^d, ||.||) the row images are
r_n = sum_k |a_nk| ||x_k||, the modular at scale sigma is
sum_n phi_n(r_n / sigma), and the norm is the smallest sigma at which the
modular is at most 1.

Infinite kernels (Cesaro, Norlund, Hilbert) produce infinitely many nonzero
rows even for finite-support x.  The modular is then a partial sum over
``rows_used`` rows plus a tail estimate.  With the ``integral_comparison``
model the estimate is a rigorous upper bound: the kernel bounds r_n by
S / (n + shift) past some row, the family bounds phi_n by a sum of powers, and
since that envelope is convex and decreasing in n,
sum_{n > N} g(n) <= integral_{N + 1/2}^inf g.  The norm solver works on
``value + tail_estimate``, so the returned sigma is feasible for the infinite
series and its accuracy is set by the tightness of the bound rather than by
the size of the tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DegeneracyError, DivergenceError, DomainError, ValidationError
from .matrix import MatrixKernel, in_class_A
from .orlicz import ENVELOPE_U_MAX, MusielakFamily

TAIL_MODELS = ("integral_comparison", "geometric_ratio_estimate", "none")
MAX_BRACKET_STEPS = 200
_CHUNK = 1 << 16


@dataclass(frozen=True)
class VectorNorm:
    """The l_p norm on R^dim, p in [1, inf]."""

    dim: int = 1
    p: float = 1.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValidationError("dimension must be a positive integer", path="dim")
        if not (self.p >= 1):
            raise ValidationError(f"l_p exponent must lie in [1, inf], got {self.p}", path="lp")

    def __call__(self, v) -> float:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise DomainError(f"expected a vector of length {self.dim}")
        return float(self.norms(v[None, :])[0])

    def norms(self, vectors) -> np.ndarray:
        """Norm of every row of an (m, dim) array."""
        a = np.abs(np.asarray(vectors, dtype=float))
        if a.size == 0:
            return np.zeros(a.shape[0])
        if self.p == 1:
            return np.array([math.fsum(r) for r in a])
        if math.isinf(self.p):
            return a.max(axis=1)
        return np.linalg.norm(a, ord=self.p, axis=1)


class VectorSequence:
    """A finitely supported sequence (x_k)_{k >= 1} in R^dim.

    Support indices are strictly increasing; zero vectors are dropped so the
    zero sequence has empty support.  Instances are immutable.
    """

    __slots__ = ("dim", "indices", "vectors")

    def __init__(self, dim, indices, vectors):
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        vec = np.asarray(vectors, dtype=float).reshape(len(idx), dim)
        if idx.size and (idx.min() < 1 or np.any(np.diff(idx) <= 0)):
            raise DomainError("support indices must be >= 1 and strictly increasing")
        if not np.all(np.isfinite(vec)):
            raise DomainError("sequence entries must be finite")
        keep = np.any(vec != 0, axis=1)
        idx, vec = idx[keep], vec[keep]
        idx.setflags(write=False)
        vec.setflags(write=False)
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "vectors", vec)

    def __setattr__(self, name, value):
        raise AttributeError("VectorSequence is immutable")

    @classmethod
    def from_entries(cls, dim, entries):
        """From ``[(index, vector), ...]`` in any order."""
        entries = sorted((int(k), list(v)) for k, v in entries)
        ks = [k for k, _ in entries]
        if len(set(ks)) != len(ks):
            raise DomainError("duplicate support index")
        return cls(dim, ks, [v for _, v in entries] or np.zeros((0, dim)))

    @classmethod
    def from_scalars(cls, values, start=1):
        """Scalar sequence x_start, x_start+1, ... (dim 1)."""
        values = np.asarray(values, dtype=float)
        return cls(1, np.arange(start, start + len(values)), values.reshape(-1, 1))

    @classmethod
    def zeros(cls, dim=1):
        return cls(dim, [], np.zeros((0, dim)))

    @property
    def is_zero(self):
        return self.indices.size == 0

    @property
    def max_index(self):
        return int(self.indices[-1]) if self.indices.size else 0

    def weights(self, vn: VectorNorm) -> np.ndarray:
        if vn.dim != self.dim:
            raise DomainError(f"vector norm has dim {vn.dim}, sequence has dim {self.dim}")
        return vn.norms(self.vectors)

    def dense(self, length=None):
        length = self.max_index if length is None else length
        out = np.zeros((length, self.dim))
        m = self.indices <= length
        out[self.indices[m] - 1] = self.vectors[m]
        return out

    def _combine(self, other, op):
        if other.dim != self.dim:
            raise DomainError("dimension mismatch")
        n = max(self.max_index, other.max_index)
        d = op(self.dense(n), other.dense(n))
        return VectorSequence(self.dim, np.arange(1, n + 1), d)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, alpha):
        return VectorSequence(self.dim, self.indices, float(alpha) * self.vectors)

    __rmul__ = __mul__

    def __truediv__(self, alpha):
        return VectorSequence(self.dim, self.indices, self.vectors / float(alpha))

    def __neg__(self):
        return self * -1.0

    def __abs__(self):
        return VectorSequence(self.dim, self.indices, np.abs(self.vectors))

    def __eq__(self, other):
        return (isinstance(other, VectorSequence) and self.dim == other.dim
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.vectors, other.vectors))

    def __hash__(self):
        return hash((self.dim, self.indices.tobytes(), self.vectors.tobytes()))

    def __repr__(self):
        items = ", ".join(f"{k}: {v.tolist()}" for k, v in zip(self.indices, self.vectors))
        return f"VectorSequence(dim={self.dim}, {{{items}}})"

    def to_spec(self, vn: VectorNorm | None = None):
        spec = {
            "dim": self.dim,
            "entries": [{"index": int(k), "vector": v.tolist()} for k, v in zip(self.indices, self.vectors)],
        }
        if vn is not None:
            spec["vector_norm"] = {"lp": "inf" if math.isinf(vn.p) else vn.p}
        return spec


@dataclass(frozen=True)
class TruncationPolicy:
    max_rows: int = 1_000_000
    tail_tol: float = 1e-2
    tail_model: str = "integral_comparison"

    def __post_init__(self):
        if self.max_rows < 1:
            raise ValidationError("max_rows must be positive", path="max_rows")
        if not self.tail_tol > 0:
            raise ValidationError("tail_tol must be positive", path="tail_tol")
        if self.tail_model not in TAIL_MODELS:
            raise ValidationError(f"unknown tail model {self.tail_model!r}", path="tail_model")


@dataclass(frozen=True)
class ModularValue:
    value: float
    rows_used: int
    tail_estimate: float
    certified: bool

    @property
    def bound(self):
        """value + tail_estimate, or value alone when the tail is unknown."""
        if math.isfinite(self.tail_estimate):
            return self.value + self.tail_estimate
        return self.value

    def to_dict(self):
        return {
            "value": self.value,
            "rows_used": self.rows_used,
            "tail_estimate": self.tail_estimate,
            "certified": self.certified,
        }


class _Rows:
    """Lazily extended row images r_1, r_2, ... for one support."""

    def __init__(self, A: MatrixKernel, indices, weights):
        self.A = A
        self.cols = np.asarray(indices, dtype=np.int64)
        self.w = np.asarray(weights, dtype=float)
        self.S = math.fsum(self.w)
        self.K = int(self.cols.max())
        self.extent = A.row_extent(self.cols)
        self.profile = A.tail_profile(self.cols)
        self._r = np.zeros(0)

    def get(self, N):
        have = self._r.size
        if N > have:
            parts = [self._r]
            start = have + 1
            while start <= N:
                stop = min(N, start + _CHUNK - 1)
                parts.append(self._compute(start, stop))
                start = stop + 1
            self._r = np.concatenate(parts)
        return self._r[:N]

    def _compute(self, lo, hi):
        n = np.arange(lo, hi + 1)
        out = np.empty(n.size)
        prof = self.profile
        cut = n.size
        if prof is not None and prof.exact:
            cut = int(np.searchsorted(n, prof.start))
            out[cut:] = self.S / (n[cut:] + prof.shift)
        if cut:
            block = np.abs(self.A.block(n[:cut], self.cols)) * self.w[None, :]
            out[:cut] = _backend.compensated_rowsum(block)
        return out


class _Modular:
    """Evaluates the truncated modular for one (family, kernel, support)."""

    def __init__(self, fam: MusielakFamily, rows: _Rows, policy: TruncationPolicy):
        self.fam = fam
        self.rows = rows
        self.policy = policy
        self.code = fam.kernel_code()
        self._exps = np.zeros(0)

    def _exponents(self, N):
        if self._exps.size < N:
            self._exps = np.asarray(self.code[1](np.arange(1, N + 1)), dtype=float)
        return self._exps[:N]

    def partial(self, sigma, N):
        r = self.rows.get(N)
        if self.code is not None:
            return _backend.modular_sum(r, 1.0 / sigma, self.code[0], self._exponents(N))
        return math.fsum(self.fam.values(np.arange(1, N + 1), r / sigma))

    def tail(self, sigma, N):
        rows = self.rows
        if rows.extent is not None and N >= rows.extent:
            return 0.0
        model = self.policy.tail_model
        if model == "none":
            return math.inf
        if model == "geometric_ratio_estimate":
            return self._geometric_tail(sigma, N)
        prof = rows.profile
        if prof is None or N + 1 < prof.start:
            return math.inf
        env = self.fam.tail_envelope(N)
        if env is None:
            return math.inf
        c = rows.S / sigma
        base = N + 0.5 + prof.shift
        if base <= 0 or c / base > ENVELOPE_U_MAX:
            return math.inf
        total = 0.0
        for coef, q in env:
            if q <= 1:
                return math.inf
            total += coef * c**q * base ** (1.0 - q) / (q - 1.0)
        return max(total, 0.0)

    def _geometric_tail(self, sigma, N):
        if N < 4:
            return math.inf
        r = self.rows.get(N)
        n = np.arange(1, N + 1)
        q1, q2 = N // 4, N // 2
        t = self.fam.values(n[q1:], r[q1:] / sigma)
        b1 = math.fsum(t[: q2 - q1])
        b2 = math.fsum(t[q2 - q1:])
        if b1 == 0:
            return 0.0 if b2 == 0 else math.inf
        rho = b2 / b1
        if rho >= 1:
            return math.inf
        return b2 * rho / (1 - rho)

    def auto_rows(self, sigma):
        """Smallest row count whose tail estimate is within tail_tol (capped)."""
        rows, pol = self.rows, self.policy
        if rows.extent is not None:
            return rows.extent
        lo = rows.K
        if rows.profile is not None:
            lo = max(lo, rows.profile.start - 1)
        cap = max(pol.max_rows, lo)
        if pol.tail_model == "none":
            return cap
        if pol.tail_model == "geometric_ratio_estimate":
            N = max(2 * lo, 64)
            while N < cap and not self.tail(sigma, N) <= pol.tail_tol:
                N *= 2
            return min(N, cap)
        if self.tail(sigma, lo) <= pol.tail_tol:
            return lo
        hi = lo
        while hi < cap:
            hi = min(cap, 2 * hi)
            if self.tail(sigma, hi) <= pol.tail_tol:
                break
        else:
            return cap
        lo_ok = hi // 2
        while hi - lo_ok > 1:
            mid = (hi + lo_ok) // 2
            if self.tail(sigma, mid) <= pol.tail_tol:
                hi = mid
            else:
                lo_ok = mid
        return hi

    def __call__(self, sigma, N=None) -> ModularValue:
        if N is None:
            N = self.auto_rows(sigma)
        val = self.partial(sigma, N)
        tail = self.tail(sigma, N)
        return ModularValue(val, int(N), tail, bool(tail <= self.policy.tail_tol))


def row_image(A: MatrixKernel, x: VectorSequence, vn: VectorNorm, n: int) -> float:
    """sum_k |a_nk| ||x_k|| (compensated)."""
    if n < 1:
        raise DomainError("row index starts at 1")
    if x.is_zero:
        return 0.0
    a = np.abs(A.block(np.array([n]), x.indices))[0]
    return math.fsum(a * x.weights(vn))


def modular(fam: MusielakFamily, A: MatrixKernel, x: VectorSequence, vn: VectorNorm,
            sigma: float = 1.0, policy: TruncationPolicy | None = None,
            rows: int | None = None) -> ModularValue:
    """The truncated modular of x / sigma.

    ``rows`` pins the row count; by default it is the first count whose tail
    estimate is within ``policy.tail_tol``, capped at ``policy.max_rows``.
    """
    if not (sigma > 0 and math.isfinite(sigma)):
        raise DomainError(f"sigma must be positive, got {sigma}")
    policy = policy or TruncationPolicy()
    if x.is_zero:
        return ModularValue(0.0, 0, 0.0, True)
    ev = _Modular(fam, _Rows(A, x.indices, x.weights(vn)), policy)
    return ev(sigma, rows)


@dataclass(frozen=True)
class NormResult:
    norm: float
    sigma_bracket: tuple
    rows_used: int
    certified: bool
    tail_estimate: float
    postcondition_ok: bool
    warnings: tuple = field(default=())

    def to_dict(self):
        return {
            "norm": self.norm,
            "sigma_bracket": list(self.sigma_bracket),
            "rows_used": self.rows_used,
            "certified": self.certified,
        }


def _class_a_warning(A, x):
    K = x.max_index
    rows = max(2 * K, 64)
    if A.shape is not None:
        rows = min(rows, A.shape[0])
        if K > A.shape[1]:
            return None
    rep = in_class_A(A, rows, K)
    cols = set(int(k) for k in x.indices)
    bad = [c for c in rep.flagged_columns if c in cols]
    if bad:
        return f"kernel has zero columns {bad} on a {rows}x{K} window (class A fails)"
    return None


def luxemburg(fam: MusielakFamily, A: MatrixKernel, x: VectorSequence, vn: VectorNorm,
              tol: float = 1e-10, policy: TruncationPolicy | None = None) -> NormResult:
    """Luxemburg norm by bracketing and bisection.

    Starting from the largest support norm, sigma is doubled or halved until
    the modular bound straddles 1; the bracket is then bisected until
    hi / lo - 1 <= tol, with the row count frozen at the value needed at the
    low end so the bisected function is monotone.  The feasible endpoint
    ``hi`` is returned.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    policy = policy or TruncationPolicy()
    if x.is_zero:
        return NormResult(0.0, (0.0, 0.0), 0, True, 0.0, True)
    warnings = []
    w = x.weights(vn)
    msg = _class_a_warning(A, x)
    if msg:
        warnings.append(msg)
    # solve for x / scale with a power-of-two scale (exact), then scale back;
    # keeps sigma away from the ends of the float range
    scale = math.ldexp(1.0, math.frexp(float(w.max()))[1] - 1)
    w = w / scale
    F = _Modular(fam, _Rows(A, x.indices, w), policy)

    sigma0 = float(w.max())
    if F(sigma0).bound > 1:
        lo, hi = sigma0, 2 * sigma0
        for _ in range(MAX_BRACKET_STEPS):
            if F(hi).bound <= 1:
                break
            lo, hi = hi, 2 * hi
        else:
            raise DivergenceError("modular stays above 1 after 200 doublings: "
                                  "the sequence is not in the space at this truncation",
                                  sigma=hi * scale)
    else:
        lo, hi = sigma0 / 2, sigma0
        for _ in range(MAX_BRACKET_STEPS):
            if F(lo).bound > 1:
                break
            lo, hi = lo / 2, lo
        else:
            raise DegeneracyError("modular stays at or below 1 after 200 halvings: "
                                  "the kernel annihilates the support (class A fails)")

    N = F.auto_rows(lo)
    # the frozen row count may move the bound slightly; re-establish the bracket
    for _ in range(MAX_BRACKET_STEPS):
        if F(hi, N).bound > 1:
            lo, hi = hi, 2 * hi
            N = max(N, F.auto_rows(lo))
        elif not F(lo, N).bound > 1:
            lo, hi = lo / 2, lo
            N = max(N, F.auto_rows(lo))
        else:
            break

    while hi / lo - 1 > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if F(mid, N).bound > 1:
            lo = mid
        else:
            hi = mid

    at = F(hi, N)
    below = F(hi * (1 - 2 * tol), N)
    post = at.value <= 1 and below.value > 1 - (policy.tail_tol + 1e-9)
    if not at.certified:
        warnings.append(f"tail not certified with {N} rows (estimate {at.tail_estimate:.3g})")
    return NormResult(hi * scale, (lo * scale, hi * scale), N, at.certified, at.tail_estimate, post,
                      tuple(warnings))


def luxemburg_norm(fam: MusielakFamily, A: MatrixKernel, x: VectorSequence, vn: VectorNorm,
                   tol: float = 1e-10, policy: TruncationPolicy | None = None) -> float:
    return luxemburg(fam, A, x, vn, tol, policy).norm


def section(x: VectorSequence, i: int) -> VectorSequence:
    """x|_i: keep indices <= i."""
    if i < 0:
        raise DomainError("section index must be >= 0")
    m = x.indices <= i
    return VectorSequence(x.dim, x.indices[m], x.vectors[m])


def tail_section(x: VectorSequence, i: int) -> VectorSequence:
    """x|_{N - i}: keep indices > i."""
    if i < 0:
        raise DomainError("section index must be >= 0")
    m = x.indices > i
    return VectorSequence(x.dim, x.indices[m], x.vectors[m])


def rearrangement(x: VectorSequence, vn: VectorNorm) -> VectorSequence:
    """Non-increasing rearrangement of (||x_k||) as a scalar sequence."""
    w = np.sort(x.weights(vn))[::-1]
    w = w[w > 0]
    return VectorSequence.from_scalars(w)


@dataclass(frozen=True)
class MembershipReport:
    l_member: bool
    witness_sigma: float | None
    h_member_on_grid: bool
    evaluations: tuple

    def to_dict(self):
        return {
            "l_member": self.l_member,
            "witness_sigma": self.witness_sigma,
            "h_member_on_grid": self.h_member_on_grid,
            "evaluations": [dict(sigma=s, **mv.to_dict()) for s, mv in self.evaluations],
            "note": "grid-based: h membership is checked only at the listed sigma values",
        }


def membership_diagnostic(fam, A, x, vn, sigma_grid, policy=None) -> MembershipReport:
    """Certified finiteness of the modular over a grid of scales."""
    grid = [float(s) for s in sigma_grid]
    if not grid or any(not s > 0 for s in grid):
        raise DomainError("sigma grid must be nonempty and positive")
    if x.is_zero:
        return MembershipReport(True, grid[0], True, ())
    policy = policy or TruncationPolicy()
    F = _Modular(fam, _Rows(A, x.indices, x.weights(vn)), policy)
    evals = tuple((s, F(s)) for s in grid)
    ok = [mv.certified and math.isfinite(mv.value) for _, mv in evals]
    witness = next((s for (s, _), good in zip(evals, ok) if good), None)
    return MembershipReport(any(ok), witness, all(ok), evals)
