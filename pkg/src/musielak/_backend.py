"""Select the compiled kernels when available, else the numpy fallback.

Set ``MUSIELAK_PURE_PYTHON=1`` to force the fallback.
"""
import contextlib
import os

from . import _kernels_py

try:
    from . import _kernels_c
except ImportError:
    _kernels_c = None

POWER = _kernels_py.POWER
POWER_LOG = _kernels_py.POWER_LOG

AVAILABLE = ("cython", "python") if _kernels_c is not None else ("python",)


def _install(name):
    global BACKEND, modular_sum, compensated_rowsum, jacobi_svd
    impl = _kernels_c if name == "cython" else _kernels_py
    if impl is None:
        raise ImportError("compiled kernels are not built")
    BACKEND = name
    modular_sum = impl.modular_sum
    compensated_rowsum = impl.compensated_rowsum
    jacobi_svd = impl.jacobi_svd


_install("python" if os.environ.get("MUSIELAK_PURE_PYTHON", "") not in ("", "0") or _kernels_c is None
         else "cython")


@contextlib.contextmanager
def use(name):
    """Temporarily switch backends (process-wide; not for concurrent use)."""
    prev = BACKEND
    _install(name)
    try:
        yield
    finally:
        _install(prev)
