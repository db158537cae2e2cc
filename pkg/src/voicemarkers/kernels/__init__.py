"""Backend dispatch for the hot tree kernels.

Two interchangeable implementations live side by side: a numba-compiled one
and a pure-numpy one. The numpy path is selected when the environment
variable ``VOICEMARKERS_NO_NUMBA`` is set to a non-empty value (anything but
"0"), or automatically when numba is not importable. ``BACKEND`` names the
active implementation ("numba" or "numpy").

Both backends implement the same contracts with matching tie-break rules and
a shared xorshift64* feature-subsampling stream, so models built through this
interface do not depend on which backend is active (up to floating-point
summation order on exactly tied feature values).
"""

import os

from . import _numpy_backend


def _want_numba():
    flag = os.environ.get("VOICEMARKERS_NO_NUMBA", "")
    return flag in ("", "0")


if _want_numba():
    try:
        from . import _numba_backend as _impl
        BACKEND = "numba"
    except ImportError:
        _impl = _numpy_backend
        BACKEND = "numpy"
else:
    _impl = _numpy_backend
    BACKEND = "numpy"

gini_tree_importances = _impl.gini_tree_importances
gbt_build_tree = _impl.gbt_build_tree
ensemble_margin = _impl.ensemble_margin

__all__ = [
    "BACKEND",
    "gini_tree_importances",
    "gbt_build_tree",
    "ensemble_margin",
    "get_backend",
]


def get_backend(name):
    """Return the backend module by name ("numba" or "numpy"); used by the
    benchmark and the cross-backend tests."""
    if name == "numpy":
        return _numpy_backend
    if name == "numba":
        from . import _numba_backend
        return _numba_backend
    raise ValueError("unknown backend: %r" % (name,))
