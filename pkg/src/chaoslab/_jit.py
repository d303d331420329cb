"""JIT selection.

Kernels are decorated with :func:`jit`.  Setting ``CHAOSLAB_DISABLE_JIT=1``
(or having no numba installed) turns the decorator into the identity, and
batch routines switch to their vectorised numpy implementations.
"""
import os

_DISABLED = os.environ.get("CHAOSLAB_DISABLE_JIT", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

USE_JIT = HAVE_NUMBA and not _DISABLED


def jit(func=None, **kwargs):
    """``numba.njit(cache=True, nogil=True)`` or a no-op."""
    opts = {"cache": True, "nogil": True}
    opts.update(kwargs)

    def wrap(f):
        if USE_JIT:
            return numba.njit(**opts)(f)
        return f

    if func is not None:
        return wrap(func)
    return wrap


def backend():
    return "numba" if USE_JIT else "numpy"
