"""Backend selection for the hot kernels.

Set ``VOFRAC_NUMBA=0`` to force the pure-numpy path. ``VOFRAC_THREADS``
caps thread use (0 or unset = library default).
"""
import os

_FALSY = ("0", "false", "no", "off")


def _numba_requested():
    return os.environ.get("VOFRAC_NUMBA", "1").strip().lower() not in _FALSY


try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _numba_requested()

if HAVE_NUMBA and "NUMBA_THREADING_LAYER" not in os.environ:
    # skip the TBB probe (and its version warning); omp is threadsafe
    numba.config.THREADING_LAYER = "omp"


def thread_cap():
    """Value of VOFRAC_THREADS, or None when unset/auto."""
    raw = os.environ.get("VOFRAC_THREADS", "").strip()
    if not raw:
        return None
    n = int(raw)
    if n < 0:
        raise ValueError("VOFRAC_THREADS must be >= 0")
    return n or None


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


if HAVE_NUMBA:
    prange = numba.prange
else:  # pragma: no cover
    prange = range


def apply_thread_cap():
    """Limit numba's worker pool to VOFRAC_THREADS, if set."""
    cap = thread_cap()
    if HAVE_NUMBA and cap:
        numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))
