"""Backend selection for the hot numerical kernels.

Set ``HETLAB_BACKEND=numpy`` to run every kernel as plain Python/NumPy
(handy for debugging and for the backend benchmark).  The default is
``numba`` when it can be imported.
"""

import os

BACKEND = os.environ.get("HETLAB_BACKEND", "numba").strip().lower()
if BACKEND not in ("numba", "numpy"):
    raise ValueError(f"HETLAB_BACKEND must be 'numba' or 'numpy', got {BACKEND!r}")

try:
    if BACKEND == "numpy":
        raise ImportError
    import numba

    USE_NUMBA = True
except ImportError:
    numba = None
    USE_NUMBA = False
    BACKEND = "numpy"


def jit(func):
    """``numba.njit`` when enabled, identity otherwise."""
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func
