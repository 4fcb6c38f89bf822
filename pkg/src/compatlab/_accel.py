"""Backend switch for the hot kernels.

Kernels are written twice: a scalar-loop version compiled with ``numba.njit``
and a vectorised numpy version.  ``COMPATLAB_BACKEND=numpy`` forces the
fallback; otherwise numba is used when it imports.
"""
from __future__ import annotations

import os

try:  # pragma: no cover - exercised implicitly
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

_requested = os.environ.get("COMPATLAB_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"COMPATLAB_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"


def njit(fn):
    """Compile ``fn`` with numba when available, else return it untouched."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def pick(numba_impl, numpy_impl):
    return numba_impl if BACKEND == "numba" else numpy_impl
