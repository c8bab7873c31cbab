"""Pure-Python/numpy implementations of the hot kernels.

These are the reference implementations; ``_kernels_c`` mirrors them
operation for operation.  Both must agree to rounding.
"""
import math

import numpy as np

POWER = 0
POWER_LOG = 1

_JACOBI_TOL = 1e-15
_JACOBI_MAX_SWEEPS = 80


def modular_sum(rows, inv_sigma, kind, exps):
    """Sum of phi_n(rows[i] * inv_sigma) for the built-in power-type kinds.

    ``exps`` holds the exponent p_n of every row.  The sum is correctly
    rounded (``math.fsum``).
    """
    u = np.asarray(rows, dtype=np.float64) * inv_sigma
    with np.errstate(over="ignore"):
        terms = np.power(u, exps)
        if kind == POWER_LOG:
            terms *= np.log1p(u) + 1.0
    return math.fsum(terms)


def compensated_rowsum(block):
    """Row sums of a 2-d array with Neumaier compensation.

    Columns are accumulated left to right, so the result does not depend on
    how rows are chunked.
    """
    block = np.asarray(block, dtype=np.float64)
    s = np.zeros(block.shape[0])
    c = np.zeros(block.shape[0])
    for j in range(block.shape[1]):
        v = block[:, j]
        t = s + v
        big = np.abs(s) >= np.abs(v)
        c += np.where(big, (s - t) + v, (v - t) + s)
        s = t
    return s + c


def jacobi_svd(a):
    """One-sided (Hestenes) Jacobi SVD.

    Returns ``(u, s, v)`` with ``a = u @ diag(s) @ v.T``, singular values
    sorted in nonincreasing order.  ``u`` is m x r and ``v`` is n x r with
    r = min(m, n).
    """
    a = np.array(a, dtype=np.float64)
    transposed = a.shape[0] < a.shape[1]
    if transposed:
        a = a.T.copy()
    m, n = a.shape
    w = np.asfortranarray(a)
    v = np.eye(n, order="F")
    for _ in range(_JACOBI_MAX_SWEEPS):
        rotated = False
        for i in range(n - 1):
            wi = w[:, i]
            for j in range(i + 1, n):
                wj = w[:, j]
                alpha = float(wi @ wi)
                beta = float(wj @ wj)
                gamma = float(wi @ wj)
                if gamma == 0.0 or abs(gamma) <= _JACOBI_TOL * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                wi_new = c * wi - s * wj
                w[:, j] = s * wi + c * wj
                w[:, i] = wi_new
                vi = v[:, i].copy()
                v[:, i] = c * vi - s * v[:, j]
                v[:, j] = s * vi + c * v[:, j]
                wi = w[:, i]
        if not rotated:
            break
    sv = np.sqrt(np.einsum("ij,ij->j", w, w))
    order = np.argsort(-sv, kind="stable")
    sv = sv[order]
    w = w[:, order]
    v = v[:, order]
    u = np.zeros_like(w)
    nz = sv > 0
    u[:, nz] = w[:, nz] / sv[nz]
    u = np.ascontiguousarray(u)
    v = np.ascontiguousarray(v)
    if transposed:
        return v, sv, u
    return u, sv, v
