"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is picked once at import time.  Set ``DIRAC_FORGE_NO_NUMBA=1``
(or have numba missing) to force the numpy implementations.
"""

import os

from . import _numpy

_disabled = os.environ.get("DIRAC_FORGE_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

if _disabled:
    _impl = _numpy
    BACKEND = "numpy"
else:
    try:
        from . import _numba as _impl
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _impl = _numpy
        BACKEND = "numpy"

diff_axis = _impl.diff_axis
node_matmul = _impl.node_matmul
node_matvec = _impl.node_matvec
geodesic_energy_grad = _impl.geodesic_energy_grad


def set_threads(count: int) -> int:
    """Cap the numba worker pool; returns the count in effect (1 on the numpy path)."""
    if count < 1:
        raise ValueError(f"thread count must be positive, got {count}")
    if BACKEND != "numba":
        return 1
    import warnings

    import numba
    count = min(count, numba.config.NUMBA_NUM_THREADS)
    with warnings.catch_warnings():
        # the threading-layer probe complains about old TBB builds it then skips
        warnings.simplefilter("ignore", numba.NumbaWarning)
        numba.set_num_threads(count)
    return count


__all__ = ["BACKEND", "diff_axis", "node_matmul", "node_matvec", "geodesic_energy_grad", "set_threads"]
