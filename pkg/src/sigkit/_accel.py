"""Backend switch for the compiled kernels.

Set ``SIGKIT_DISABLE_NUMBA=1`` to force the pure-numpy code paths. The
switch is read once at import time.
"""

import os

_disabled = os.environ.get("SIGKIT_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _disabled
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, otherwise the identity decorator."""
    if _njit is not None:
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn
