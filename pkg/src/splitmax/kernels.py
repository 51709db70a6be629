"""Backend selection for the hot kernels.

The Cython extension is used when importable; set ``SPLITMAX_PURE_PYTHON=1``
to force the pure-Python fallback. Both produce identical results for the
same inputs, since randomness is drawn outside the kernels.
"""

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("SPLITMAX_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernels


def ic_reach(indptr, indices, live, seeds, backend=None):
    """Reach counts per node and reached-set size per world.

    ``live`` is a (worlds, edges) uint8 mask in CSR edge order.
    Returns ``(counts, sizes)`` as int64 arrays.
    """
    impl = _impl
    if backend == "python":
        impl = _pykernels
    elif backend == "cython":
        from . import _ckernels as impl
    n = len(indptr) - 1
    counts = np.zeros(n, dtype=np.int64)
    sizes = np.zeros(live.shape[0], dtype=np.int64)
    if live.shape[0] and len(seeds):
        impl.ic_reach(
            np.ascontiguousarray(indptr, dtype=np.int64),
            np.ascontiguousarray(indices, dtype=np.int64),
            np.ascontiguousarray(live, dtype=np.uint8),
            np.ascontiguousarray(seeds, dtype=np.int64),
            counts,
            sizes,
        )
    return counts, sizes
