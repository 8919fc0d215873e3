"""Hot geometry kernels, compiled when available.

The Cython extension ``_native`` is preferred; the NumPy module
``_fallback`` is used when the extension was not built or when the
environment variable ``AMSPLACE_PURE_PYTHON=1`` is set.
"""
import os

from . import _fallback

fallback = _fallback

if os.environ.get("AMSPLACE_PURE_PYTHON") == "1":
    native = None
else:
    try:
        from . import _native as native
    except ImportError:  # extension not built
        native = None

_impl = native if native is not None else _fallback

BACKEND = _impl.BACKEND
hpwl = _impl.hpwl
separation_deficit = _impl.separation_deficit
least_violated = _impl.least_violated
proximity = _impl.proximity
fdgd_run = _impl.fdgd_run

__all__ = [
    "BACKEND", "hpwl", "separation_deficit", "least_violated", "proximity",
    "fdgd_run", "native", "fallback",
]
