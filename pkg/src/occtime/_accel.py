"""Backend switch for the Monte Carlo kernels.

Set ``OCCTIME_BACKEND=numpy`` to force the vectorised numpy kernels even
when numba is importable. ``OCCTIME_BACKEND=numba`` (the default) uses the
compiled kernels when possible.
"""
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_VALID = ("numba", "numpy")


def _initial_backend():
    name = os.environ.get("OCCTIME_BACKEND", "numba").strip().lower()
    if name not in _VALID:
        raise ValueError(f"OCCTIME_BACKEND must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


_backend = _initial_backend()


def get_backend():
    return _backend


def set_backend(name):
    """Select the kernel backend at runtime; returns the previous choice."""
    global _backend
    name = name.lower()
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    old, _backend = _backend, name
    return old


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise the identity decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
