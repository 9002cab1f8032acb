"""Hot numeric kernels: compiled core with a pure-numpy fallback.

The compiled extension (geocube._kernels._core) is preferred when it was
built; otherwise the numpy implementations are used transparently.  Set
GEOCUBE_PURE_PYTHON=1 to force the fallback (used by the benchmark and the
backend-equivalence tests).
"""

import os

if os.environ.get("GEOCUBE_PURE_PYTHON"):
    from geocube._kernels import _fallback as _impl

    BACKEND = "numpy"
else:
    try:
        from geocube._kernels import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from geocube._kernels import _fallback as _impl

        BACKEND = "numpy"

grid_index_batch = _impl.grid_index_batch
kde_accumulate = _impl.kde_accumulate
fdeb_iterate = _impl.fdeb_iterate

__all__ = ["BACKEND", "grid_index_batch", "kde_accumulate", "fdeb_iterate"]
