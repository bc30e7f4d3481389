"""Pick the compiled kernels when available, else the numpy fallback.

Set ``PASSIVE_QKD_BACKEND=python`` to force the fallback (used by the
benchmark and by the backend-equivalence tests).
"""

import os

from . import _fallback

_NAMES = (
    "bessel_i_series",
    "struve_l_series",
    "bessel_i_array",
    "struve_l_array",
    "interval_moments",
    "mc_events",
)


def load(name=None):
    """Return ``(backend_name, module)`` for ``name`` in {"compiled", "python", None}."""
    if name is None:
        name = os.environ.get("PASSIVE_QKD_BACKEND", "auto").lower()
    if name in ("auto", "compiled", "cython"):
        try:
            from . import _kernels
        except ImportError:
            if name != "auto":
                raise
        else:
            return "compiled", _kernels
    return "python", _fallback


BACKEND, kernels = load()
