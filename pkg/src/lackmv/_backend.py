"""Kernel backend selection.

Set ``LACKMV_DISABLE_NUMBA=1`` before import to force the pure-numpy kernels.
If numba cannot be imported the numpy path is used regardless.
"""
import os

_FLAG = os.environ.get("LACKMV_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG not in ("", "0", "false", "no")

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


USE_NUMBA = HAS_NUMBA and not DISABLED_BY_ENV
BACKEND = "numba" if USE_NUMBA else "numpy"
