"""Kernel backend selection.

The compiled Cython extension is used when importable; otherwise the NumPy
fallback. Override with CORRINEQ_BACKEND=compiled|python|auto.
"""

import os

_choice = os.environ.get("CORRINEQ_BACKEND", "auto").lower()
if _choice not in ("auto", "compiled", "python"):
    raise RuntimeError(
        f"CORRINEQ_BACKEND must be auto, compiled or python, got {_choice!r}")

if _choice == "python":
    from . import pure as _impl
    BACKEND = "python"
else:
    try:
        from . import _compiled as _impl
        BACKEND = "compiled"
    except ImportError:
        if _choice == "compiled":
            raise
        from . import pure as _impl
        BACKEND = "python"

polytope_contains = _impl.polytope_contains
polytope_project = _impl.polytope_project
ellipsoid_contains = _impl.ellipsoid_contains
ellipsoid_project = _impl.ellipsoid_project

__all__ = [
    "BACKEND",
    "polytope_contains",
    "polytope_project",
    "ellipsoid_contains",
    "ellipsoid_project",
]
