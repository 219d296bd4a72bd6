"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``OFFLOAD_OPT_PURE=1`` to force the fallback.
"""
import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and not os.environ.get("OFFLOAD_OPT_PURE"):
    minplus_select = _compiled.minplus_select
    BACKEND = "compiled"
else:
    minplus_select = _kernels_py.minplus_select
    BACKEND = "python"

IMPLEMENTATIONS = {"python": _kernels_py.minplus_select}
if _compiled is not None:
    IMPLEMENTATIONS["compiled"] = _compiled.minplus_select
