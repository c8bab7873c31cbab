"""Acceptance criteria, one marked test (or group) per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints one
PASS/FAIL line per criterion.
"""
import math

import numpy as np
import pytest

from musielak.geometry import (SequenceSampler, SpaceConfig, check_ak, check_norm_modular,
                               check_order_continuity, check_sigma_dc, check_uniform_monotonicity,
                               check_uniform_opial, replay_worst_case)
from musielak.matrix import MatrixKernel, column_lphi_norm, estimate_condition_M
from musielak.orlicz import Exponents, MusielakFamily, check_delta2_family, default_grid
from musielak.snumbers import (FiniteOperator, OperatorSampler, check_quasi_norm_axioms,
                               check_s_axioms, ideal_quasi_norm)
from musielak.space import VectorNorm, VectorSequence, luxemburg_norm

import oracles

acceptance = pytest.mark.acceptance
TOL = 1e-10
I = MatrixKernel.identity()
C = MatrixKernel.cesaro1()
H = MatrixKernel.hilbert()
PL2 = MusielakFamily.power_log_seq(2.0)


@acceptance(criterion=1, title="Luxemburg norm vs closed-form l_p (identity kernel)")
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 4.0])
def test_luxemburg_closed_form(p):
    fam = MusielakFamily.power_seq(p)
    sampler = SequenceSampler(seed=100 + int(10 * p))
    worst = 0.0
    for _ in range(1000):
        x = sampler.sequence()
        want = oracles.lp_norm(x.vectors[:, 0], p)
        got = luxemburg_norm(fam, I, x, VectorNorm(), TOL)
        worst = max(worst, abs(got - want) / want)
    assert worst <= 1e-8


@acceptance(criterion=2, title="norm axioms under cesaro1 + power_log")
def test_norm_axioms():
    vn = VectorNorm(2, 1.0)
    cfg = SpaceConfig(PL2, C, vn, tol=TOL)
    sampler = SequenceSampler(seed=2, dim=2)
    rng = np.random.default_rng(2)
    homog = tri = 0.0
    assert cfg.norm(VectorSequence.zeros(2)) == 0.0
    for _ in range(500):
        x, y = sampler.sequence(), sampler.sequence()
        nx, ny = cfg.norm(x), cfg.norm(y)
        assert nx > 0 and ny > 0
        alpha = float(rng.uniform(-10, 10))
        homog = max(homog, abs(cfg.norm(x * alpha) - abs(alpha) * nx) / (abs(alpha) * nx))
        tri = max(tri, cfg.norm(x + y) - (nx + ny))
    assert homog <= 1e-8 and tri <= 1e-8


@acceptance(criterion=3, title="norm-modular relation on {identity, cesaro1} x {power 2, power_log 2}")
@pytest.mark.parametrize("fam", [MusielakFamily.power_seq(2.0), PL2], ids=["power2", "power_log2"])
@pytest.mark.parametrize("A", [I, C], ids=["identity", "cesaro1"])
def test_norm_modular(A, fam):
    cfg = SpaceConfig(fam, A, tol=TOL)
    rep = check_norm_modular(cfg, samples=200, seed=3)
    tail_tol = cfg.policy.tail_tol
    assert rep.samples == 200 and rep.violations == 0
    assert rep.measured["modular_min"] >= 1 - 1e-6 - tail_tol
    assert rep.measured["modular_max"] <= 1 + 1e-6


@acceptance(criterion=4, title="AK property")
@pytest.mark.parametrize("A", [I, C], ids=["identity", "cesaro1"])
def test_ak(A):
    rep = check_ak(SpaceConfig(PL2, A, tol=TOL), samples=100, seed=4)
    assert rep.samples == 100 and rep.violations == 0 and rep.passed


@acceptance(criterion=5, title="condition-M window constants (64x32)")
@pytest.mark.parametrize("A,M", [(I, 1.0), (C, 2.0)], ids=["identity", "cesaro1"])
def test_condition_M_identity_cesaro(A, M):
    assert abs(estimate_condition_M(A, 64, 32).M_estimate - M) <= 1e-12


@acceptance(criterion=5, title="condition-M window constants (64x32)")
@pytest.mark.xfail(strict=True, reason="the windowed maximum for the Hilbert matrix is 1 + 64/65 at "
                                       "(64, 1), not 1.5 at (1, 1); see the decisions ledger")
def test_condition_M_hilbert():
    r = estimate_condition_M(H, 64, 32)
    assert abs(r.M_estimate - 1.5) <= 1e-12 and r.attained_at == (1, 1)


@acceptance(criterion=6, title="delta_2 falsifier discrimination")
def test_delta2_discrimination():
    grid = default_grid()
    ok = check_delta2_family(MusielakFamily.power_seq(2.0), 4.0, 0.5, 0.0, 64, grid)
    assert ok.passed and ok.parameters["c_sum"] == 0.0
    fam = MusielakFamily.power_seq(Exponents.explicit(range(1, 65)))
    bad = check_delta2_family(fam, 100.0, 0.5, 1e6, 64, grid)
    assert not bad.passed
    n, x = bad.violating_index, bad.violating_point
    phi = fam.member(n)
    assert 1 <= n <= 64 and phi(x) <= 0.5 and phi(2 * x) > 100 * phi(x)


@acceptance(criterion=7, title="s-axioms S1-S5 and brute-force a_2 oracle")
def test_s_axioms():
    smp = OperatorSampler(seed=7, shape=(8, 8))
    rep = None
    for _ in range(500):
        rep = check_s_axioms(*(smp.operator() for _ in range(4)), report=rep)
    assert rep.samples == 500 and rep.passed
    assert all(rep.margins[k] >= -1e-9 for k in ("S2", "S3", "S4", "S5"))
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(100):
        a = rng.standard_normal((2, 2))
        worst = max(worst, abs(FiniteOperator(a).s_numbers.s(2) - oracles.brute_force_a2(a)))
    assert worst <= 1e-4


@acceptance(criterion=8, title="ideal quasi-norm vs l_p of singular values; orthogonal invariance")
@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_ideal_quasi_norm_oracle(p):
    fam = MusielakFamily.power_seq(p)
    smp = OperatorSampler(seed=8 + int(p), shape=(6, 6))
    err = inv = 0.0
    for _ in range(200):
        T = smp.operator()
        q = ideal_quasi_norm(fam, I, T, TOL)
        want = oracles.lp_norm(oracles.singular_values(T.entries), p)
        err = max(err, abs(q - want) / want)
        U, V = smp.orthogonal(6), smp.orthogonal(6)
        inv = max(inv, abs(ideal_quasi_norm(fam, I, FiniteOperator(U @ T.entries @ V.T), TOL) - q) / q)
    assert err <= 1e-8 and inv <= 1e-9


@acceptance(criterion=9, title="QN2 with M = 2 and QN3 under cesaro1 + power 2")
def test_qn2_qn3():
    rep = check_quasi_norm_axioms(MusielakFamily.power_seq(2.0), C, OperatorSampler(seed=9), samples=500, tol=TOL)
    assert rep.samples == 500 and rep.measured["M_estimate"] == 2.0
    assert rep.checks["QN2"] is True and rep.checks["QN3"] is True
    assert rep.margins["QN2"] >= -1e-9 and rep.margins["QN3"] >= -1e-9


@acceptance(criterion=10, title="rank-one factorization through the first-column norm")
@pytest.mark.parametrize("A,fam", [(I, PL2), (C, PL2), (H, MusielakFamily.power_seq(2.0))],
                         ids=["identity", "cesaro1", "hilbert"])
def test_rank_one_factorization(A, fam):
    col = column_lphi_norm(A, fam, 1, tol=TOL)
    if A is H:
        assert abs(col - oracles.PI_OVER_SQRT6) <= 1e-6
    smp = OperatorSampler(seed=10)
    worst = 0.0
    for _ in range(200):
        r = smp.rank_one()
        q = ideal_quasi_norm(fam, A, r.operator, TOL)
        want = np.linalg.norm(r.functional) * np.linalg.norm(r.image) * col
        worst = max(worst, abs(q - want) / want)
    assert worst <= 1e-8


@acceptance(criterion=11, title="geometry harnesses: UM, Opial, sigma-DC, order continuity")
def test_geometry():
    um_cfg = SpaceConfig(PL2, C, VectorNorm(2, 1.0), tol=TOL)
    um = check_uniform_monotonicity(um_cfg, 0.5, samples=200, seed=11)
    assert um.passed and um.estimated_modulus > 0
    assert abs(replay_worst_case(um_cfg, um) - um.estimated_modulus) <= 1e-10

    e1 = VectorSequence(1, [1], [[1.0]])
    op = check_uniform_opial(SpaceConfig(MusielakFamily.power_seq(2.0), I, tol=TOL), 0.5, 8, e1)
    assert abs(op.estimated_modulus - (math.sqrt(2) - 1)) <= 1e-6

    cfg = SpaceConfig(MusielakFamily.power_seq(2.0), C, tol=TOL)
    dc = check_sigma_dc(cfg, samples=100, seed=11)
    assert dc.samples == 100 and dc.violations == 0 and dc.passed
    oc = check_order_continuity(cfg, samples=50, seed=11)
    assert oc.samples == 100 and oc.violations == 0 and oc.passed
