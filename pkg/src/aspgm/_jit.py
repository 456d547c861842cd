"""Optional numba acceleration.

Kernels are written once in a numba-compatible subset of numpy and compiled
with ``numba.njit`` when it is importable.  Setting ``ASPGM_DISABLE_NUMBA=1``
in the environment (before import) runs the same functions as plain Python
over numpy arrays.
"""
import os

_disabled = os.environ.get("ASPGM_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _disabled:
        raise ImportError("disabled by ASPGM_DISABLE_NUMBA")
    import numba as _numba

    NUMBA_ENABLED = True
except ImportError:
    _numba = None
    NUMBA_ENABLED = False


def maybe_njit(func):
    """Compile ``func`` with numba when enabled, otherwise return it unchanged."""
    if NUMBA_ENABLED:
        return _numba.njit(cache=True)(func)
    return func


def force_njit(func):
    """Compile regardless of the environment flag (used by the kernel benchmark)."""
    if _numba is None:
        import numba

        return numba.njit(cache=True)(func)
    return _numba.njit(cache=True)(func)
