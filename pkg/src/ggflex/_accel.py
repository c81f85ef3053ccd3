"""Backend selection for the numeric kernels.

Kernels are compiled with numba when it is importable and the environment
variable ``GGFLEX_DISABLE_NUMBA`` is unset (or ``0``).  Otherwise the
pure-numpy implementations are used.  Both backends return identical
results; the switch only affects speed.
"""

import os

_DISABLE = os.environ.get("GGFLEX_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLE:
        raise ImportError("numba disabled by GGFLEX_DISABLE_NUMBA")
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def backend() -> str:
    """Name of the active kernel backend: ``"numba"`` or ``"numpy"``."""
    return "numba" if NUMBA_AVAILABLE else "numpy"
