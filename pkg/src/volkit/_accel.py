"""Optional numba acceleration.

Hot kernels in :mod:`volkit._kernels` are compiled with ``@njit`` when numba
is importable.  Setting the environment variable ``VOLKIT_NO_NUMBA=1`` (or
``true``/``yes``) forces the pure-Python/numpy fallback path; both paths run
the same source, so results are identical either way.
"""

import os

_flag = os.environ.get("VOLKIT_NO_NUMBA", "0").strip().lower()
NUMBA_DISABLED = _flag in ("1", "true", "yes")

NUMBA_ENABLED = False
if not NUMBA_DISABLED:
    try:
        from numba import njit  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass

if not NUMBA_ENABLED:

    def njit(*args, **kwargs):  # type: ignore[no-redef]
        """No-op stand-in for numba.njit on the fallback path."""
        if args and callable(args[0]):
            return args[0]

        def decorate(fn):
            return fn

        return decorate
