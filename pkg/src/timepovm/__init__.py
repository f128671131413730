"""Covariant time observables on finite energy grids.

Builds covariant positive operator valued measures for arrival-time
statistics, dilates them to sharp shift-covariant measures on a larger
space, and certifies the time-energy uncertainty bounds they obey,
including the positive-energy bound governed by the Dirichlet Airy
problem on the half line.
"""

__version__ = "0.1.0"

from .linalg import Spectrum, SymTridiag, hermitian_eigh, sturm_count, tridiag_lowest_eigs
from .special import airy_ai, airy_zero, min_product_identity, universal_constant

__all__ = [
    "Spectrum",
    "SymTridiag",
    "hermitian_eigh",
    "sturm_count",
    "tridiag_lowest_eigs",
    "airy_ai",
    "airy_zero",
    "min_product_identity",
    "universal_constant",
    "__version__",
]
