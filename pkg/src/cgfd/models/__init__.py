"""Concrete constrained models, each a FiducialModel + ImplicitManifold pair."""

from .ar1 import ar1_covariance, ar1_model, params_from_covariance, rho_sigma_from_params, simulate_ar1
from .equal_means import (
    equal_means_chart,
    equal_means_cubic_manifold,
    equal_means_direct_model,
    equal_means_model,
)
from .logspline import default_knots, logspline_model, simulate_triangular
from .sphere import sphere_model

__all__ = [
    "ar1_covariance",
    "ar1_model",
    "params_from_covariance",
    "rho_sigma_from_params",
    "simulate_ar1",
    "equal_means_chart",
    "equal_means_cubic_manifold",
    "equal_means_direct_model",
    "equal_means_model",
    "default_knots",
    "logspline_model",
    "simulate_triangular",
    "sphere_model",
]
