"""Hot-kernel backend selection.

Prefers the compiled Cython extension; falls back to the numpy
implementations when the extension is missing or ``BLINDMI_NO_EXT=1`` is
set in the environment.  ``BACKEND`` reports which one is active.
"""

import os

from . import _fallback

if os.environ.get("BLINDMI_NO_EXT", "") == "1":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

occupancy_loggamma_table = _impl.occupancy_loggamma_table
mixture_mi_terms = _impl.mixture_mi_terms

__all__ = ["BACKEND", "occupancy_loggamma_table", "mixture_mi_terms"]
