"""Optional numba acceleration.

The compiled path is used when numba imports cleanly and the environment
variable ``SEMIWEYL_NUMBA`` is not set to a false value (``0``, ``off``,
``false``, ``no``).  Every accelerated kernel has a pure-numpy twin, so the
package works identically without numba, only slower.
"""

import os

_FALSE = {"0", "off", "false", "no"}


def _dummy_njit(*args, **kwargs):
    """Stand-in for ``numba.njit`` that returns the function untouched."""
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrapper(f):
        return f

    return wrapper


def numba_requested():
    return os.environ.get("SEMIWEYL_NUMBA", "1").strip().lower() not in _FALSE


try:
    import numba

    HAVE_NUMBA = True
    njit = numba.njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False
    njit = _dummy_njit


def use_numba():
    """Whether kernels should dispatch to their compiled versions right now."""
    return HAVE_NUMBA and numba_requested()
