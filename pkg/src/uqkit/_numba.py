"""Numba availability switch.

Set ``UQKIT_NUMBA=0`` in the environment to force the pure-numpy kernels.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

_flag = os.environ.get("UQKIT_NUMBA", "1").strip().lower()
ENABLED = numba is not None and _flag not in ("0", "false", "no", "off")


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise.

    Compilation is lazy, so decorating is cheap even when the numpy path is
    selected at runtime.
    """
    if numba is None:
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)
