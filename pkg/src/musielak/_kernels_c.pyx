# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, log1p, sqrt, fabs, copysign

cnp.import_array()

DEF POWER = 0
DEF POWER_LOG = 1
DEF JACOBI_TOL = 1e-15
DEF JACOBI_MAX_SWEEPS = 80


cdef inline void _neumaier(double v, double* s, double* c) noexcept nogil:
    cdef double t = s[0] + v
    if fabs(s[0]) >= fabs(v):
        c[0] += (s[0] - t) + v
    else:
        c[0] += (v - t) + s[0]
    s[0] = t


def modular_sum(const double[::1] rows, double inv_sigma, int kind,
                const double[::1] exps):
    cdef Py_ssize_t i, n = rows.shape[0]
    cdef double s = 0.0, c = 0.0, u, p, term
    with nogil:
        for i in range(n):
            u = rows[i] * inv_sigma
            p = exps[i]
            if p == 2.0:
                term = u * u
            elif p == 1.0:
                term = u
            else:
                term = pow(u, p)
            if kind == POWER_LOG:
                term *= log1p(u) + 1.0
            _neumaier(term, &s, &c)
    return s + c


def compensated_rowsum(const double[:, :] block):
    cdef Py_ssize_t i, j, m = block.shape[0], n = block.shape[1]
    out = np.empty(m)
    cdef double[::1] o = out
    cdef double s, c
    with nogil:
        for i in range(m):
            s = 0.0
            c = 0.0
            for j in range(n):
                _neumaier(block[i, j], &s, &c)
            o[i] = s + c
    return out


def jacobi_svd(a):
    arr = np.array(a, dtype=np.float64)
    transposed = arr.shape[0] < arr.shape[1]
    if transposed:
        arr = arr.T
    # column-major so that columns are contiguous
    wa = np.array(arr.T, dtype=np.float64, order="C")
    cdef Py_ssize_t n = wa.shape[0], m = wa.shape[1]
    va = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] w = wa
    cdef double[:, ::1] v = va
    cdef Py_ssize_t i, j, k, sweep
    cdef double alpha, beta, gamma, zeta, t, cs, sn, x, y
    cdef bint rotated
    with nogil:
        for sweep in range(JACOBI_MAX_SWEEPS):
            rotated = False
            for i in range(n - 1):
                for j in range(i + 1, n):
                    alpha = 0.0
                    beta = 0.0
                    gamma = 0.0
                    for k in range(m):
                        alpha = alpha + w[i, k] * w[i, k]
                        beta = beta + w[j, k] * w[j, k]
                        gamma = gamma + w[i, k] * w[j, k]
                    if gamma == 0.0 or fabs(gamma) <= JACOBI_TOL * sqrt(alpha * beta):
                        continue
                    rotated = True
                    zeta = (beta - alpha) / (2.0 * gamma)
                    t = copysign(1.0, zeta) / (fabs(zeta) + sqrt(1.0 + zeta * zeta))
                    cs = 1.0 / sqrt(1.0 + t * t)
                    sn = cs * t
                    for k in range(m):
                        x = w[i, k]
                        y = w[j, k]
                        w[i, k] = cs * x - sn * y
                        w[j, k] = sn * x + cs * y
                    for k in range(n):
                        x = v[i, k]
                        y = v[j, k]
                        v[i, k] = cs * x - sn * y
                        v[j, k] = sn * x + cs * y
            if not rotated:
                break
    # rows of ``va`` are the columns of V (rotations applied to V^T rows)
    wcols = wa.T
    vcols = va.T
    sv = np.sqrt(np.einsum("ij,ij->j", wcols, wcols))
    order = np.argsort(-sv, kind="stable")
    sv = sv[order]
    wcols = wcols[:, order]
    vcols = vcols[:, order]
    u = np.zeros_like(wcols)
    nz = sv > 0
    u[:, nz] = wcols[:, nz] / sv[nz]
    u = np.ascontiguousarray(u)
    vcols = np.ascontiguousarray(vcols)
    if transposed:
        return vcols, sv, u
    return u, sv, vcols
