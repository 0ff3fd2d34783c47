"""Backend selection for the hot kernels.

Kernels in :mod:`twistlab.kernels` exist twice: a numba-compiled loop
version and a pure numpy/Python version. Setting ``TWISTLAB_NO_NUMBA=1``
(or running without numba installed) selects the numpy path.
"""

import os

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    NUMBA_AVAILABLE = False


def _flag_set(name):
    return os.environ.get(name, "").strip().lower() not in ("", "0", "false", "no")


NUMBA_DISABLED = _flag_set("TWISTLAB_NO_NUMBA")


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if NUMBA_AVAILABLE:
        return numba.njit(cache=True, nogil=True)(func)
    return func


def default_backend():
    if NUMBA_AVAILABLE and not NUMBA_DISABLED:
        return "numba"
    return "numpy"


def thread_cap():
    """Worker cap from TWISTLAB_THREADS (default: cpu count)."""
    raw = os.environ.get("TWISTLAB_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1
