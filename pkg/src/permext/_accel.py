"""Backend selection for the hot distance kernels.

Numba is used when it imports cleanly and ``PERMEXT_DISABLE_NUMBA`` is unset
(or ``0``).  Setting it to ``1`` forces the pure-numpy path, which is what the
tests use to cross-check the two implementations.
"""

import os

DISABLE_ENV = "PERMEXT_DISABLE_NUMBA"
THREADS_ENV = "PERMEXT_THREADS"


def _flag_set(name):
    return os.environ.get(name, "").strip().lower() not in ("", "0", "false", "no")


try:
    import numba

    HAVE_NUMBA = True
    # the bundled TBB is too old for numba; skip it rather than warn every run
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _flag_set(DISABLE_ENV)


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)

    def wrap(fn):
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap


if HAVE_NUMBA:
    prange = numba.prange
else:  # pragma: no cover
    prange = range


def set_threads(count=None):
    """Cap numba's worker pool; ``None`` reads ``PERMEXT_THREADS``."""
    if count is None:
        raw = os.environ.get(THREADS_ENV)
        if not raw:
            return
        count = int(raw)
    if HAVE_NUMBA and count > 0:
        numba.set_num_threads(min(count, numba.config.NUMBA_NUM_THREADS))


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
