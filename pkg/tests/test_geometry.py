import math

import numpy as np
import pytest

from musielak.errors import PreconditionError
from musielak.geometry import (MARGIN_FLOOR, SequenceSampler, SpaceConfig, check_ak,
                               check_delta2_collapse, check_norm_modular, check_order_continuity,
                               check_sigma_dc, check_uniform_monotonicity, check_uniform_opial,
                               family_hypotheses, opial_blocks, order_ladder, replay_worst_case,
                               seq_from_spec, seq_to_spec)
from musielak.matrix import MatrixKernel
from musielak.orlicz import MusielakFamily
from musielak.space import TruncationPolicy, VectorNorm, VectorSequence

I = MatrixKernel.identity()
C = MatrixKernel.cesaro1()
P2 = MusielakFamily.power_seq(2.0)
PL2 = MusielakFamily.power_log_seq(2.0)


def e(k, dim=1, scale=1.0):
    return VectorSequence(dim, [k], [[scale] * dim])


class TestSampler:
    def test_deterministic(self):
        a = [SequenceSampler(7, 2).sequence() for _ in range(1)]
        b = [SequenceSampler(7, 2).sequence() for _ in range(1)]
        assert a == b

    def test_ranges(self):
        s = SequenceSampler(1, 3)
        for _ in range(50):
            x = s.sequence(nonnegative=True)
            assert 1 <= len(x.indices) <= 8 and x.indices.max() <= 64
            assert np.all(x.vectors >= 0) and x.dim == 3

    def test_spec_round_trip(self):
        x = SequenceSampler(3, 2).sequence()
        assert seq_from_spec(seq_to_spec(x)) == x


class TestNormModular:
    def test_closed_form(self):
        cfg = SpaceConfig(P2, I)
        z = VectorSequence.from_scalars([3 / 5, 4 / 5])
        assert cfg.modular(z).value == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("A", [I, C], ids=["identity", "cesaro1"])
    def test_unit_vector(self, A):
        cfg = SpaceConfig(PL2, A)
        x = e(5, scale=3.0)
        v = cfg.modular(x / cfg.norm(x)).value
        assert 1 - 10 * cfg.tol - cfg.policy.tail_tol <= v <= 1 + 10 * cfg.tol

    def test_harness(self):
        cfg = SpaceConfig(PL2, C)
        rep = check_norm_modular(cfg, samples=15, seed=2)
        assert rep.passed and rep.violations == 0 and rep.samples == 15
        assert replay_worst_case(cfg, rep) == pytest.approx(rep.estimated_modulus, abs=1e-10)

    def test_delta2_version_checks_family(self):
        rep = check_norm_modular(SpaceConfig(P2, I), samples=3, delta2_version=True)
        assert rep.hypotheses["delta2"] == "pass_on_grid"
        from musielak.orlicz import OrliczFunction
        fam = MusielakFamily.constant(OrliczFunction.custom(math.expm1))
        assert family_hypotheses(fam)["delta2"] == "not_checked"
        with pytest.raises(PreconditionError):
            check_norm_modular(SpaceConfig(fam, I), samples=1, delta2_version=True)


class TestUniformMonotonicity:
    def test_closed_form_identity(self):
        cfg = SpaceConfig(P2, I)
        eps = 0.3
        got = cfg.norm(e(1) + e(2, scale=eps)) - 1
        assert got == pytest.approx(math.sqrt(1 + eps * eps) - 1, rel=1e-9)

    def test_y_equals_x(self):
        cfg = SpaceConfig(PL2, C)
        x = e(3, scale=2.0)
        x = x / cfg.norm(x)
        assert cfg.norm(x + x) - 1 == pytest.approx(1.0, rel=1e-9)

    def test_harness_passes_and_replays(self):
        cfg = SpaceConfig(PL2, C, VectorNorm(2, 1.0))
        rep = check_uniform_monotonicity(cfg, 0.5, samples=12, seed=1)
        assert rep.passed and rep.estimated_modulus > MARGIN_FLOOR and rep.hypotheses["al_space"]
        assert replay_worst_case(cfg, rep) == pytest.approx(rep.estimated_modulus, abs=1e-10)

    def test_nested_epsilons(self):
        cfg = SpaceConfig(PL2, C)
        mods = [check_uniform_monotonicity(cfg, eps, samples=8, seed=4).estimated_modulus for eps in (1, 0.5, 0.25)]
        assert mods[0] >= mods[1] >= mods[2] > 0

    def test_non_l1_requires_exploratory(self):
        cfg = SpaceConfig(PL2, C, VectorNorm(2, 2.0))
        with pytest.raises(PreconditionError):
            check_uniform_monotonicity(cfg, 0.5, samples=2)
        rep = check_uniform_monotonicity(cfg, 0.5, samples=2, exploratory=True)
        assert rep.status == "hypothesis_violated" and rep.notes

    def test_epsilon_positive(self):
        with pytest.raises(PreconditionError):
            check_uniform_monotonicity(SpaceConfig(P2, I), 0.0, samples=1)


class TestOpial:
    def test_identity_closed_form(self):
        rep = check_uniform_opial(SpaceConfig(P2, I), 0.5, 6, e(1))
        assert rep.estimated_modulus == pytest.approx(math.sqrt(2) - 1, abs=1e-9)
        assert rep.passed and rep.hypotheses == {"triangle": True, "disjoint_supports": True}

    def test_cesaro_monotone_in_epsilon(self):
        cfg = SpaceConfig(P2, C)
        mus = []
        for eps in (1.0, 0.5, 0.25):
            x = e(1)
            x = x * (eps / cfg.norm(x))
            mus.append(check_uniform_opial(cfg, eps, 5, x * (1 + 1e-9)).estimated_modulus)
        assert all(m > 0 for m in mus) and mus[0] >= mus[1] >= mus[2]

    def test_zero_fixed_x_rejected(self):
        with pytest.raises(PreconditionError):
            check_uniform_opial(SpaceConfig(P2, I), 0.5, 3, VectorSequence.zeros())

    def test_hilbert_needs_exploratory(self):
        cfg = SpaceConfig(P2, MatrixKernel.hilbert())
        with pytest.raises(PreconditionError):
            check_uniform_opial(cfg, 0.5, 2, e(1))
        rep = check_uniform_opial(cfg, 0.5, 2, e(1), exploratory=True)
        assert rep.status == "hypothesis_violated"

    def test_blocks_are_coordinatewise_null(self):
        x = VectorSequence(1, [2, 7], [[1.0], [2.0]])
        blocks = opial_blocks(x, 10, 3, 1, np.random.default_rng(0))
        seen = set(x.indices.tolist())
        for b in blocks:
            s = set(b.indices.tolist())
            assert not (s & seen) and len(s) == 3
            seen |= s
        # every fixed index is eventually outside all later blocks
        assert all(b.indices.min() > 7 for b in blocks)

    def test_replay(self):
        cfg = SpaceConfig(P2, C)
        rep = check_uniform_opial(cfg, 0.5, 4, e(2, scale=3.0), block_width=2, seed=5)
        assert replay_worst_case(cfg, rep) == pytest.approx(rep.estimated_modulus, abs=1e-10)


class TestSigmaDC:
    def test_harness(self):
        rep = check_sigma_dc(SpaceConfig(P2, C), samples=10, chain_length=6, seed=3)
        assert rep.passed and rep.violations == 0

    def test_monotone_limit_chain(self):
        cfg = SpaceConfig(P2, C)
        y = VectorSequence.from_scalars([1.0, 2.0, 0.5])
        chain = [y * (1 - 2.0 ** -n) for n in range(1, 60)]
        sup = np.max(np.stack([c.dense(3) for c in chain]), axis=0)
        assert np.array_equal(sup, y.dense(3))
        assert cfg.norm(VectorSequence(1, [1, 2, 3], sup)) == cfg.norm(y)


class TestOrderContinuity:
    def test_tail_hits_zero(self):
        x = VectorSequence.from_scalars([1.0, -2.0, 3.0])
        lad = order_ladder(x, 3, "tail")
        assert lad[-1].is_zero

    def test_halving(self):
        cfg = SpaceConfig(P2, C)
        x = VectorSequence.from_scalars([1.0, -2.0, 3.0])
        vals = [cfg.norm(z) for z in order_ladder(x, 5, "halve")]
        for j, v in enumerate(vals):
            assert v == pytest.approx(vals[0] / 2 ** j, rel=1e-9)

    def test_harness(self):
        rep = check_order_continuity(SpaceConfig(P2, C), samples=4, seed=1)
        assert rep.passed and rep.samples == 8

    def test_bad_mode(self):
        with pytest.raises(PreconditionError):
            order_ladder(e(1), 2, "sideways")


class TestAK:
    def test_harness(self):
        cfg = SpaceConfig(PL2, C)
        rep = check_ak(cfg, samples=6, seed=2)
        assert rep.passed and rep.estimated_modulus >= -1e-12


class TestDelta2Collapse:
    def test_identity(self):
        rep = check_delta2_collapse(SpaceConfig(P2, I), samples=10)
        assert rep.passed and rep.measured["excluded_not_certified"] == 0

    def test_cesaro(self):
        rep = check_delta2_collapse(SpaceConfig(P2, C), samples=10, seed=1)
        assert rep.passed and rep.samples > 0

    def test_hilbert_linear_excluded(self):
        cfg = SpaceConfig(MusielakFamily.constant(1.0), MatrixKernel.hilbert(),
                          policy=TruncationPolicy(max_rows=2000))
        rep = check_delta2_collapse(cfg, samples=3)
        assert rep.violations == 0 and rep.status == "inconclusive"
        assert rep.measured["excluded_not_certified"] == 3


class TestHypotheses:
    def test_power_log_bounded(self):
        h = family_hypotheses(PL2)
        assert h == {"delta2": "pass_on_grid", "star": "pass_on_grid"}


class TestParallel:
    def test_matches_serial(self):
        cfg = SpaceConfig(PL2, C)
        a = check_uniform_monotonicity(cfg, 0.5, samples=6, seed=9).to_dict()
        b = check_uniform_monotonicity(cfg, 0.5, samples=6, seed=9, parallel=True).to_dict()
        assert a == b
