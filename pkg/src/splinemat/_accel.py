"""Numba acceleration shim.

Hot kernels are written as plain numpy code and wrapped with ``numba.njit``
when acceleration is on.  Set the environment variable ``SPLINEMAT_NUMBA=0``
before import to force the pure-numpy fallback path (same code, un-jitted).
"""

import os

_flag = os.environ.get("SPLINEMAT_NUMBA", "1").strip().lower()
_want_numba = _flag not in ("0", "false", "no", "off")

if _want_numba:
    try:
        from numba import njit as _numba_njit
    except ImportError:
        _numba_njit = None
else:
    _numba_njit = None

USING_NUMBA = _numba_njit is not None


def njit(func=None, **kwargs):
    """``numba.njit(cache=True, nogil=True)`` or a no-op, per backend."""
    if USING_NUMBA:
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        if func is None:
            return lambda f: _numba_njit(**kwargs)(f)
        return _numba_njit(**kwargs)(func)
    if func is None:
        return lambda f: f
    return func


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"
