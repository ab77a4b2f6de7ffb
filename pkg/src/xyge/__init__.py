"""Geometric entanglement and geometric phases of the transverse-field XY chain.

Three regimes share one interface: ``thermo`` (quasi-momentum integrals),
``finite`` (mode products for even N) and ``exact`` (dense diagonalisation,
N <= 12), the last serving as the oracle for the other two.
"""

from .analysis import ResultRow, evaluate_point
from .finite import ge_per_site_finite, gp_per_site_finite, lambda_finite
from .model import ChainSpec, ModelParams, theta_continuum, theta_modes
from .thermo import (SELECTED_CONVENTION, complex_ge_density, ge_density, geometric_record,
                     gp_density_ground, gp_delta)

__all__ = [
    "ChainSpec", "ModelParams", "ResultRow", "SELECTED_CONVENTION", "complex_ge_density",
    "evaluate_point", "ge_density", "ge_per_site_finite", "geometric_record", "gp_density_ground",
    "gp_delta", "gp_per_site_finite", "lambda_finite", "theta_continuum", "theta_modes",
]
__version__ = "0.1.0"
