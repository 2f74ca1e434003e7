"""Hot numeric loops with two interchangeable backends.

The numba backend JIT-compiles the per-ray grid traversal and the DTW
dynamic program; the numpy backend is a vectorized (raycast) or plain-loop
(DTW) twin written to perform the identical float64 arithmetic, so the two
backends agree bit-for-bit. Selection:

    NAVGATE_NUMBA=0   force the pure-numpy fallback
    (default)         numba when importable, numpy otherwise

`benchmarks/bench_kernels.py` times both and checks agreement.
"""

from __future__ import annotations

import os

from . import numpy_impl

_FLAG = os.environ.get("NAVGATE_NUMBA", "1") != "0"
_numba_impl = None
if _FLAG:
    try:
        from . import numba_impl as _numba_impl
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _numba_impl = None

_active = _numba_impl if _numba_impl is not None else numpy_impl


def backend_name() -> str:
    return "numba" if _active is not numpy_impl else "numpy"


def raycast_scan(grid, x0, y0, dirx, diry, cell_size, max_range):
    """First-hit depth and cell class along each ray; misses give max_range, 0.

    Ray directions are passed as unit-vector components so both backends see
    identical float64 inputs (trig stays outside the kernels).
    """
    return _active.raycast_scan(grid, x0, y0, dirx, diry, cell_size, max_range)


def dtw_cost(a, b):
    """Boundary-matched DTW alignment cost with Euclidean point distance."""
    return _active.dtw_cost(a, b)
