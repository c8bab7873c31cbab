import math

import numpy as np
from hypothesis import assume, given, settings, strategies as st

from musielak.matrix import MatrixKernel
from musielak.orlicz import (MusielakFamily, OrliczFunction, check_convexity_monotonicity,
                             check_delta2_zero, check_superadditive)
from musielak.snumbers import FiniteOperator, ideal_quasi_norm
from musielak.space import (VectorNorm, VectorSequence, luxemburg_norm, modular, section,
                            tail_section)

KERNELS = {"identity": MatrixKernel.identity(), "cesaro1": MatrixKernel.cesaro1(),
           "norlund": MatrixKernel.norlund([1.0, 2.0, 0.5])}
FAMILIES = {"power2": MusielakFamily.power_seq(2.0), "power_log2": MusielakFamily.power_log_seq(2.0),
            "power3": MusielakFamily.power_seq(3.0)}
TOL = 1e-10

exponent = st.floats(1.0, 8.0)
entry = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def sequences(draw, dim=1, nonneg=False, max_index=24):
    idx = draw(st.lists(st.integers(1, max_index), min_size=1, max_size=6, unique=True))
    idx.sort()
    lo = 0.0 if nonneg else -10.0
    vals = draw(st.lists(st.lists(st.floats(lo, 10.0), min_size=dim, max_size=dim),
                         min_size=len(idx), max_size=len(idx)))
    return VectorSequence(dim, idx, vals)


def nonzero(x):
    return not x.is_zero and float(np.max(np.abs(x.vectors))) > 1e-6


space = st.tuples(st.sampled_from(sorted(KERNELS)), st.sampled_from(sorted(FAMILIES)))


# points below ~1e-100 underflow t^p to 0 and are (correctly) flagged
@given(p=exponent, grid=st.lists(st.floats(1e-12, 100), min_size=2, max_size=30, unique=True))
def test_power_functions_convex_on_random_grids(p, grid):
    for f in (OrliczFunction.power(p), OrliczFunction.power_log(p)):
        assert check_convexity_monotonicity(f, sorted([0.0] + grid)).passed


@given(p=exponent, pairs=st.lists(st.tuples(st.floats(0, 50), st.floats(0, 50)), min_size=1, max_size=10))
def test_superadditive(p, pairs):
    for f in (OrliczFunction.power(p), OrliczFunction.power_log(p)):
        assert check_superadditive(f, pairs).passed


@given(p=exponent, t0=st.floats(0.01, 10))
def test_delta2_zero_power(p, t0):
    assert check_delta2_zero(OrliczFunction.power(p), 2.0 ** p * (1 + 1e-12), t0).passed


@settings(max_examples=40)
@given(sp=space, x=sequences(), s1=st.floats(0.1, 10), s2=st.floats(0.1, 10))
def test_modular_monotone_in_sigma(sp, x, s1, s2):
    A, fam = KERNELS[sp[0]], FAMILIES[sp[1]]
    lo, hi = sorted((s1, s2))
    vn = VectorNorm()
    a = modular(fam, A, x, vn, lo, rows=300).value
    b = modular(fam, A, x, vn, hi, rows=300).value
    assert a >= b


@settings(max_examples=40)
@given(sp=space, x=sequences(), y=sequences(), lam=st.floats(0, 1))
def test_modular_convex(sp, x, y, lam):
    A, fam = KERNELS[sp[0]], FAMILIES[sp[1]]
    vn = VectorNorm()
    f = lambda z: modular(fam, A, z, vn, 10.0, rows=300).value
    lhs = f(x * lam + y * (1 - lam))
    assert lhs <= lam * f(x) + (1 - lam) * f(y) + 1e-10 * max(1.0, lhs)


@settings(max_examples=30)
@given(sp=space, x=sequences(dim=2), alpha=st.floats(-50, 50))
def test_homogeneity(sp, x, alpha):
    assume(nonzero(x) and abs(alpha) > 1e-3)
    A, fam = KERNELS[sp[0]], FAMILIES[sp[1]]
    vn = VectorNorm(2, 2.0)
    a = luxemburg_norm(fam, A, x * alpha, vn)
    b = abs(alpha) * luxemburg_norm(fam, A, x, vn)
    assert math.isclose(a, b, rel_tol=2 * TOL)


@settings(max_examples=30)
@given(sp=space, x=sequences(), y=sequences())
def test_triangle(sp, x, y):
    A, fam = KERNELS[sp[0]], FAMILIES[sp[1]]
    vn = VectorNorm()
    n = lambda z: luxemburg_norm(fam, A, z, vn)
    lhs, rhs = n(x + y), n(x) + n(y)
    assert lhs <= rhs * (1 + 2 * TOL) + 1e-300


@settings(max_examples=30)
@given(sp=space, y=sequences(dim=2), frac=st.lists(st.floats(0, 1), min_size=12, max_size=12))
def test_lattice_monotone(sp, y, frac):
    A, fam = KERNELS[sp[0]], FAMILIES[sp[1]]
    f = np.asarray(frac[: 2 * len(y.indices)] + [1.0] * (2 * len(y.indices) - len(frac[: 2 * len(y.indices)])))
    x = VectorSequence(2, y.indices, y.vectors * f.reshape(-1, 2))
    vn = VectorNorm(2, 1.0)
    assert luxemburg_norm(fam, A, x, vn) <= luxemburg_norm(fam, A, y, vn) * (1 + TOL)


@settings(max_examples=25)
@given(sp=space, x=sequences())
def test_ak_property(sp, x):
    A, fam = KERNELS[sp[0]], FAMILIES[sp[1]]
    vn = VectorNorm()
    norms = [luxemburg_norm(fam, A, x - section(x, m), vn) for m in range(x.max_index + 2)]
    assert all(b <= a * (1 + TOL) for a, b in zip(norms, norms[1:]))
    assert all(v == 0.0 for v in norms[x.max_index:])


@given(x=sequences(dim=3), i=st.integers(0, 30))
def test_section_partition(x, i):
    assert section(x, i) + tail_section(x, i) == x + VectorSequence.zeros(3)


mats = st.integers(1, 6).flatmap(lambda m: st.integers(1, 6).flatmap(
    lambda n: st.tuples(*[st.lists(st.lists(entry, min_size=n, max_size=n), min_size=m, max_size=m)] * 2)))


@given(pair=mats)
def test_s2_additivity_all_indices(pair):
    S, T = FiniteOperator(pair[0]), FiniteOperator(pair[1])
    sS, sT, sST = S.s_numbers, T.s_numbers, (S + T).s_numbers
    r = min(S.shape)
    scale = max(1.0, sS.s(1) + sT.s(1))
    for i in range(1, r + 1):
        for j in range(1, r + 2 - i):
            assert sST.s(i + j - 1) <= sS.s(i) + sT.s(j) + 1e-12 * scale


@settings(max_examples=25)
@given(seed=st.integers(0, 2 ** 32 - 1), fam=st.sampled_from(sorted(FAMILIES)))
def test_quasi_norm_orthogonal_invariance(seed, fam):
    rng = np.random.default_rng(seed)
    T = rng.standard_normal((4, 4))
    U, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    V, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    A = MatrixKernel.cesaro1()
    a = ideal_quasi_norm(FAMILIES[fam], A, FiniteOperator(T))
    b = ideal_quasi_norm(FAMILIES[fam], A, FiniteOperator(U @ T @ V.T))
    assert math.isclose(a, b, rel_tol=1e-9)
