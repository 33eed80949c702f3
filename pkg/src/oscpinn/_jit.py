"""Numba switch.

Set ``OSCPINN_DISABLE_NUMBA=1`` to run every kernel through its pure-numpy
(or plain Python) path. The flag is read once, at import time.
"""
import os

_FALSY = {"", "0", "false", "no", "off"}

JIT_OPTIONS = {
    "nogil": True,
    "cache": True,
}


def _numba_requested():
    return os.environ.get("OSCPINN_DISABLE_NUMBA", "").strip().lower() in _FALSY


numba = None


try:
    if _numba_requested():
        import numba
except ImportError:  # pragma: no cover - numba is a hard dependency but stay usable
    numba = None

USE_NUMBA = numba is not None


def njit(func):
    """``numba.njit`` when enabled, identity otherwise."""
    if USE_NUMBA:
        return numba.njit(**JIT_OPTIONS)(func)
    return func


def backend():
    return "numba" if USE_NUMBA else "numpy"
