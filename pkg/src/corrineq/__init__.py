"""Numerical verification engine for Gaussian-type correlation inequalities
over radial and product measures on R^d."""

from ._kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
