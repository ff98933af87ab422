"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
picked otherwise, or when ``BB_DISABLE_EXT`` is set. Both expose the same
two functions with identical semantics.
"""

from __future__ import annotations

import os

if os.environ.get("BB_DISABLE_EXT"):
    from . import _kernels_py as _backend

    COMPILED = False
else:
    try:
        from . import _kernels as _backend  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        from . import _kernels_py as _backend

        COMPILED = False

BACKEND = "compiled" if COMPILED else "python"
dense_scores = _backend.dense_scores
bm25_scores = _backend.bm25_scores
