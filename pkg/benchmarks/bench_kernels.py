"""Compiled vs pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the three hot kernels and one full Luxemburg solve under each backend
and prints the speedup.  Also checks that both backends agree.
"""
import argparse
import timeit

import numpy as np

from musielak import _backend
from musielak.matrix import MatrixKernel
from musielak.orlicz import MusielakFamily
from musielak.space import TruncationPolicy, VectorNorm, VectorSequence, luxemburg


def cases(rng):
    rows = np.abs(rng.standard_normal(200_000)) / np.arange(1, 200_001)
    exps = np.full(rows.size, 2.5)
    block = rng.standard_normal((4000, 64))
    mat = rng.standard_normal((12, 12))
    fam = MusielakFamily.power_log_seq(2.0)
    x = VectorSequence.from_scalars(rng.standard_normal(16))
    pol = TruncationPolicy()
    return {
        "modular_sum (200k rows, p=2.5)":
            lambda: _backend.modular_sum(rows, 0.7, _backend.POWER, exps),
        "modular_sum log (200k rows)":
            lambda: _backend.modular_sum(rows, 0.7, _backend.POWER_LOG, exps),
        "compensated_rowsum (4000x64)":
            lambda: _backend.compensated_rowsum(block),
        "jacobi_svd (12x12)":
            lambda: _backend.jacobi_svd(mat),
        "luxemburg cesaro1/power_log":
            lambda: luxemburg(fam, MatrixKernel.cesaro1(), x, VectorNorm(), 1e-10, pol).norm,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    fns = cases(rng)
    if "cython" not in _backend.AVAILABLE:
        print("compiled kernels not built; only the python backend is available")
    results = {}
    for backend in _backend.AVAILABLE:
        with _backend.use(backend):
            for name, fn in fns.items():
                t = min(timeit.repeat(fn, number=1, repeat=args.repeat))
                results[(backend, name)] = (t, fn())
    print(f"{'kernel':36s} {'python':>11s} {'cython':>11s} {'speedup':>8s}  agree")
    for name in fns:
        tp, vp = results[("python", name)]
        if ("cython", name) in results:
            tc, vc = results[("cython", name)]
            va = np.concatenate([np.ravel(np.abs(a)) for a in (vp if isinstance(vp, tuple) else (vp,))])
            vb = np.concatenate([np.ravel(np.abs(a)) for a in (vc if isinstance(vc, tuple) else (vc,))])
            agree = np.allclose(va, vb, rtol=1e-9, atol=1e-12)
            print(f"{name:36s} {tp * 1e3:9.3f}ms {tc * 1e3:9.3f}ms {tp / tc:7.1f}x  {agree}")
        else:
            print(f"{name:36s} {tp * 1e3:9.3f}ms {'-':>11s}")


if __name__ == "__main__":
    main()
