"""Kernel backend selection.

The hot loops ship in two flavours: numba-compiled scalar loops and
vectorised pure-numpy code.  ``BOOLNL_BACKEND=numpy`` (or ``BOOLNL_NUMBA=0``)
forces the numpy path; otherwise numba is used when it imports.
"""

import os
import warnings

# the parallel layer falls back to OpenMP/workqueue when TBB is too old; that
# is harmless, so keep its import-time warning out of CLI output
warnings.filterwarnings("ignore", message="The TBB threading layer")

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional accelerator
    numba = None


def _requested() -> str:
    backend = os.environ.get("BOOLNL_BACKEND", "").strip().lower()
    if backend in ("numpy", "numba"):
        return backend
    if os.environ.get("BOOLNL_NUMBA", "1").strip() in ("0", "false", "no", "off"):
        return "numpy"
    return "numba"


NUMBA_AVAILABLE = numba is not None
BACKEND = "numba" if (_requested() == "numba" and NUMBA_AVAILABLE) else "numpy"


def set_threads(threads):
    """Cap the numba worker pool; a no-op on the numpy backend."""
    if threads and NUMBA_AVAILABLE:
        threads = max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS))
        numba.set_num_threads(threads)
