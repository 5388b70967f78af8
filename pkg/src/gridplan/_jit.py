"""JIT selection for the numeric kernels.

Kernels are compiled with ``numba.njit`` unless ``GRIDPLAN_NO_JIT`` is set to a
truthy value (or numba is not importable), in which case the same source runs
as plain Python over numpy arrays.
"""

import os

_flag = os.environ.get("GRIDPLAN_NO_JIT", "").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

try:
    if DISABLED:
        raise ImportError
    from numba import njit as _numba_njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def njit(*args, **kwargs):
    if HAS_NUMBA:
        return _numba_njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrapper(f):
        return f

    return wrapper


JIT_ENABLED = HAS_NUMBA
