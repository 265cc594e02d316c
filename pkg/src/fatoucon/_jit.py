"""Optional numba shim: kernels run as plain Python when numba is absent."""
from __future__ import annotations

import os

try:  # pragma: no cover - exercised implicitly
    import numba as _numba
    from numba import njit, prange

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # skip the TBB probe, which warns on older system TBB builds
        _numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

    def max_threads() -> int:
        return int(_numba.config.NUMBA_NUM_THREADS)

    def set_threads(k: int) -> int:
        k = max(1, min(int(k), max_threads()))
        _numba.set_num_threads(k)
        return k

except ImportError:  # pragma: no cover
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap

    def max_threads() -> int:
        return 1

    def set_threads(k: int) -> int:
        return 1


__all__ = ["HAVE_NUMBA", "njit", "prange", "max_threads", "set_threads"]
