import math
import os
import subprocess
import sys

import numpy as np
import pytest

from musielak import _backend, _kernels_py
from musielak.matrix import MatrixKernel
from musielak.orlicz import MusielakFamily
from musielak.snumbers import FiniteOperator
from musielak.space import VectorNorm, VectorSequence, luxemburg

compiled = pytest.mark.skipif("cython" not in _backend.AVAILABLE, reason="compiled kernels not built")


def test_default_prefers_compiled():
    want = "cython" if "cython" in _backend.AVAILABLE and not os.environ.get("MUSIELAK_PURE_PYTHON") else "python"
    assert _backend.BACKEND == want


def test_env_forces_fallback():
    code = "import musielak; print(musielak.BACKEND)"
    env = dict(os.environ, MUSIELAK_PURE_PYTHON="1")
    r = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert r.stdout.strip() == "python"


def test_use_restores():
    before = _backend.BACKEND
    with _backend.use("python"):
        assert _backend.BACKEND == "python" and _backend.jacobi_svd is _kernels_py.jacobi_svd
    assert _backend.BACKEND == before


@compiled
class TestParity:
    rng = np.random.default_rng(0)

    @pytest.mark.parametrize("kind", [_backend.POWER, _backend.POWER_LOG])
    @pytest.mark.parametrize("p", [1.0, 2.0, 2.7])
    def test_modular_sum(self, kind, p):
        from musielak import _kernels_c
        rows = np.abs(self.rng.standard_normal(5000)) / np.arange(1, 5001)
        exps = np.full(rows.size, p)
        a = _kernels_py.modular_sum(rows, 0.7, kind, exps)
        b = _kernels_c.modular_sum(rows, 0.7, kind, exps)
        assert b == pytest.approx(a, rel=1e-14)

    def test_rowsum(self):
        from musielak import _kernels_c
        block = self.rng.standard_normal((200, 300)) * 10.0 ** self.rng.integers(-8, 8, (200, 300))
        a = _kernels_py.compensated_rowsum(block)
        b = _kernels_c.compensated_rowsum(block)
        exact = np.array([math.fsum(r) for r in block])
        assert np.allclose(a, exact, rtol=1e-15, atol=0) and np.allclose(b, exact, rtol=1e-15, atol=0)

    @pytest.mark.parametrize("shape", [(6, 6), (9, 4), (3, 8)])
    def test_svd(self, shape):
        from musielak import _kernels_c
        a = self.rng.standard_normal(shape)
        _, s1, _ = _kernels_py.jacobi_svd(a)
        u, s2, v = _kernels_c.jacobi_svd(a)
        assert np.allclose(s1, s2, rtol=0, atol=1e-13 * s1[0])
        assert np.linalg.norm(a - (u * s2) @ v.T) <= 1e-12 * np.linalg.norm(a)

    def test_end_to_end_norm(self):
        fam = MusielakFamily.power_log_seq(2.0)
        x = VectorSequence.from_scalars([1.0, -0.5, 2.0, 0, 3.0])
        out = {}
        for name in ("python", "cython"):
            with _backend.use(name):
                out[name] = luxemburg(fam, MatrixKernel.cesaro1(), x, VectorNorm()).norm
                out[name + "_s"] = FiniteOperator(np.arange(12.0).reshape(3, 4)).s_numbers.tolist()
        assert out["cython"] == pytest.approx(out["python"], rel=1e-12)
        assert np.allclose(out["cython_s"], out["python_s"], atol=1e-13)
