"""Infinite matrices A = (a_nk) given by entry generators, with window-relative
structural diagnostics.

Indices are 1-based throughout, as in the usual sequence-space notation.
Nothing here ever materializes an infinite matrix; every check takes an
explicit window and records it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, RangeError, ValidationError

KINDS = ("identity", "cesaro1", "norlund", "hilbert", "lorentz_diag", "custom_table")


class TailProfile(NamedTuple):
    """Row images satisfy r_n <= S / (n + shift) for n >= start, where S is the
    sum of the support weights; with ``exact`` the bound is an identity."""

    start: int
    shift: float
    exact: bool


@dataclass(frozen=True)
class MatrixKernel:
    kind: str
    weights: tuple = ()
    p: float | None = None
    q: float | None = None
    table: tuple = ()
    _partial: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown matrix kind {self.kind!r}", path="kind")
        if self.kind == "norlund":
            w = self.weights
            if not w:
                raise ValidationError("Norlund kernel needs weights", path="weights")
            if any(not (math.isfinite(a) and a >= 0) for a in w):
                raise ValidationError("Norlund weights must be finite and >= 0", path="weights")
            if not w[0] > 0:
                raise ValidationError("first Norlund weight must be positive so A_n > 0", path="weights[0]")
            object.__setattr__(self, "_partial", tuple(np.cumsum(w)))
        if self.kind == "lorentz_diag":
            if not (self.p and self.p > 0 and self.q and self.q > 0):
                raise ValidationError("lorentz_diag needs p, q > 0", path="p")
        if self.kind == "custom_table":
            if not self.table or not all(len(r) == len(self.table[0]) for r in self.table):
                raise ValidationError("custom table must be a nonempty rectangular array", path="table")

    # constructors

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def cesaro1(cls):
        return cls("cesaro1")

    @classmethod
    def norlund(cls, weights):
        """Norlund means with weights a_1, a_2, ...; the last weight repeats."""
        return cls("norlund", weights=tuple(float(a) for a in weights))

    @classmethod
    def hilbert(cls):
        return cls("hilbert")

    @classmethod
    def lorentz_diag(cls, p, q):
        return cls("lorentz_diag", p=float(p), q=float(q))

    @classmethod
    def custom_table(cls, table):
        return cls("custom_table", table=tuple(tuple(float(v) for v in row) for row in table))

    # evaluation

    @property
    def shape(self):
        """(rows, cols) of a custom table, None for infinite kernels."""
        if self.kind == "custom_table":
            return len(self.table), len(self.table[0])
        return None

    def entry(self, n: int, k: int) -> float:
        if n < 1 or k < 1:
            raise DomainError("matrix indices start at 1")
        return float(self.block(np.array([n]), np.array([k]))[0, 0])

    def block(self, rows, cols) -> np.ndarray:
        """The len(rows) x len(cols) array of entries a_{rows[i], cols[j]}."""
        n = np.asarray(rows, dtype=np.int64)[:, None]
        k = np.asarray(cols, dtype=np.int64)[None, :]
        if self.kind == "identity":
            return (n == k).astype(float)
        if self.kind == "cesaro1":
            return np.where(k <= n, 1.0 / n, 0.0)
        if self.kind == "hilbert":
            return 1.0 / (n + k - 1)
        if self.kind == "lorentz_diag":
            return np.where(n == k, np.power(n.astype(float), 1.0 / self.p - 1.0 / self.q), 0.0)
        if self.kind == "norlund":
            w = np.asarray(self.weights)
            L = len(w)
            j = n + 1 - k
            valid = (k <= n)
            a = w[np.clip(j, 1, L) - 1]
            return np.where(valid, a / self._norlund_partial(n), 0.0)
        tab = np.asarray(self.table)
        if n.size and (n.max() > tab.shape[0] or k.max() > tab.shape[1]):
            raise RangeError(f"custom table is {tab.shape[0]}x{tab.shape[1]}; "
                             f"requested up to ({int(n.max())}, {int(k.max())})")
        return tab[n - 1, k - 1]

    def _norlund_partial(self, n):
        part = np.asarray(self._partial)
        L = len(part)
        n = np.asarray(n)
        inside = part[np.clip(n, 1, L) - 1]
        return np.where(n <= L, inside, part[-1] + (n - L) * self.weights[-1])

    # structure used by the modular

    def row_extent(self, cols):
        """Last row that can be nonzero for support columns ``cols``, or None."""
        K = int(max(cols))
        if self.kind in ("identity", "lorentz_diag"):
            return K
        if self.kind == "custom_table":
            if K > len(self.table[0]):
                raise RangeError(f"support index {K} beyond the {len(self.table[0])} table columns")
            return len(self.table)
        if self.kind == "norlund" and self.weights[-1] == 0:
            last = max(i for i, a in enumerate(self.weights, 1) if a > 0)
            return K + last - 1
        return None

    def tail_profile(self, cols) -> TailProfile | None:
        cols = list(cols)
        K = int(max(cols))
        if self.kind == "cesaro1":
            return TailProfile(K, 0.0, True)
        if self.kind == "norlund" and self.weights[-1] > 0:
            L = len(self.weights)
            a_last = self.weights[-1]
            return TailProfile(K + L - 1, self._partial[-1] / a_last - L, True)
        if self.kind == "hilbert":
            kmin = int(min(cols))
            return TailProfile(1, float(kmin - 1), len(set(cols)) == 1)
        return None

    def to_spec(self):
        spec = {"kind": self.kind}
        if self.kind == "norlund":
            spec["weights"] = list(self.weights)
        if self.kind == "lorentz_diag":
            spec.update(p=self.p, q=self.q)
        if self.kind == "custom_table":
            spec["table"] = [list(r) for r in self.table]
        return spec


def entry(A: MatrixKernel, n: int, k: int) -> float:
    return A.entry(n, k)


@dataclass(frozen=True)
class ClassAReport:
    member_on_window: bool
    first_nonzero_row_per_column: list
    flagged_columns: list
    window: tuple

    def to_dict(self):
        return {
            "member_on_window": self.member_on_window,
            "first_nonzero_row_per_column": self.first_nonzero_row_per_column,
            "flagged_columns": self.flagged_columns,
            "window": list(self.window),
        }


def in_class_A(A: MatrixKernel, window_rows: int, window_cols: int) -> ClassAReport:
    """Window-relative test that no column is identically zero."""
    if window_rows < 1 or window_cols < 1:
        raise DomainError("window must be at least 1x1")
    B = A.block(np.arange(1, window_rows + 1), np.arange(1, window_cols + 1))
    nz = B != 0
    first = [int(np.argmax(nz[:, j])) + 1 if nz[:, j].any() else None for j in range(window_cols)]
    flagged = [j + 1 for j, f in enumerate(first) if f is None]
    return ClassAReport(not flagged, first, flagged, (window_rows, window_cols))


def is_triangle(A: MatrixKernel, window: int) -> bool:
    """a_nn != 0 and a_nk = 0 for k > n, for all n, k <= window."""
    B = A.block(np.arange(1, window + 1), np.arange(1, window + 1))
    return bool(np.all(np.diag(B) != 0) and not np.any(np.triu(B, 1)))


@dataclass(frozen=True)
class ConditionMReport:
    M_estimate: float
    window: tuple
    violated: bool
    hard_violations: list
    attained_at: tuple | None
    growth_ratio: float | None

    def to_dict(self):
        return {
            "M_estimate": self.M_estimate,
            "window": list(self.window),
            "violated": self.violated,
            "hard_violations": [list(v) for v in self.hard_violations],
            "attained_at": None if self.attained_at is None else list(self.attained_at),
            "growth_ratio": self.growth_ratio,
        }


def _condition_M_window(A, rows, cols):
    n = np.arange(1, rows + 1)
    B = np.abs(A.block(n, np.arange(1, 2 * cols + 1)))
    base = B[:, :cols]
    lhs = B[:, 0::2] + B[:, 1::2]  # |a_{n,2k-1}| + |a_{n,2k}|
    nz = base != 0
    ratio = np.where(nz, lhs / np.where(nz, base, 1.0), 0.0)
    hard = np.argwhere(~nz & (lhs > 0))
    M = float(ratio.max()) if nz.any() else 0.0
    at = tuple(int(v) + 1 for v in np.unravel_index(np.argmax(ratio), ratio.shape)) if nz.any() else None
    return M, at, hard


def estimate_condition_M(A: MatrixKernel, window_rows: int, window_cols: int,
                         growth_threshold: float = 1.5) -> ConditionMReport:
    """Smallest M with |a_{n,2k-1}| + |a_{n,2k}| <= M |a_nk| on the window.

    An entry a_nk = 0 with a nonzero left side is a hard violation.  The
    estimate is also compared against the half-size window; growth by more
    than ``growth_threshold`` is flagged as a violation (no finite M pattern).
    """
    if window_rows < 1 or window_cols < 1:
        raise DomainError("window must be at least 1x1")
    M, at, hard = _condition_M_window(A, window_rows, window_cols)
    growth = None
    if window_rows >= 2 and window_cols >= 2:
        M_half, _, _ = _condition_M_window(A, window_rows // 2, window_cols // 2)
        if M_half > 0:
            growth = M / M_half
    violated = bool(len(hard)) or (growth is not None and growth > growth_threshold)
    hard_list = [(int(i) + 1, int(j) + 1) for i, j in hard[:10]]
    return ConditionMReport(M, (window_rows, window_cols), violated, hard_list, at, growth)


def column_lphi_norm(A: MatrixKernel, fam, col: int, trunc=None, tol: float = 1e-10) -> float:
    """Luxemburg norm of the column (|a_{n,col}|)_n in the Musielak-Orlicz space.

    The series sum_n phi_n(|a_{n,col}| / sigma) is the modular of the unit
    sequence e_col under A, so the Luxemburg solver is applied to e_col.
    Raises TruncationError (carrying the partial value) when the tail does not
    certify under ``trunc``.
    """
    from . import space
    from .errors import TruncationError

    if col < 1:
        raise DomainError("column index starts at 1")
    x = space.VectorSequence.from_entries(1, [(col, [1.0])])
    res = space.luxemburg(fam, A, x, space.VectorNorm(1, 1.0), tol=tol, policy=trunc)
    if not res.certified:
        raise TruncationError("column series did not certify under the truncation policy",
                              partial=res.norm, rows_used=res.rows_used)
    return res.norm
