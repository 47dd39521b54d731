"""Constrained generalized fiducial distributions on implicit level sets.

Builds posterior-like fiducial densities on parameter spaces of the form
``{theta : g(theta) = 0}``, samples them with constrained Hamiltonian and
tangent-space Metropolis-Hastings kernels, and verifies them against
deterministic chart quadrature.
"""

from .errors import (
    BadShape,
    CayleySingular,
    CgfdError,
    CovarianceNotSPD,
    DataOutOfRange,
    DegenerateJacobian,
    EmptyData,
    EmptySamples,
    InfeasibleInit,
    KnotsInvalid,
    NonFinite,
    OffManifold,
    OutOfDomain,
    PseudoinverseFailure,
    RankDeficient,
)
from .geometry import (
    ImplicitManifold,
    TangentFrame,
    project_to_manifold,
    projection_matrix,
    pseudo_det_scale,
    tangent_frame,
)
from .kernels import (
    Chart,
    FiducialModel,
    cgfd_grad_log,
    cgfd_log_kernel,
    gfd_grad_log,
    gfd_log_kernel,
    hwang_log_kernel,
    parameterized_gfd_log_kernel,
)
from .quadrature import (
    GridDensity,
    circle_chart,
    normalize_on_chart,
    region_mass,
    sphere_polar_chart,
)
from .samplers import (
    ChainState,
    ChainStats,
    HmcConfig,
    MhConfig,
    Target,
    cgfd_target,
    default_hmc_config,
    default_mh_config,
    hmc_step,
    init_state,
    mh_step,
    run_chain,
)

__version__ = "0.1.0"

__all__ = [
    "BadShape", "CayleySingular", "CgfdError", "CovarianceNotSPD",
    "DataOutOfRange", "DegenerateJacobian", "EmptyData", "EmptySamples",
    "InfeasibleInit", "KnotsInvalid", "NonFinite", "OffManifold",
    "OutOfDomain", "PseudoinverseFailure", "RankDeficient",
    "ImplicitManifold", "TangentFrame", "project_to_manifold",
    "projection_matrix", "pseudo_det_scale", "tangent_frame",
    "Chart", "FiducialModel", "cgfd_grad_log", "cgfd_log_kernel",
    "gfd_grad_log", "gfd_log_kernel", "hwang_log_kernel",
    "parameterized_gfd_log_kernel",
    "GridDensity", "circle_chart", "normalize_on_chart", "region_mass",
    "sphere_polar_chart",
    "ChainState", "ChainStats", "HmcConfig", "MhConfig", "Target",
    "cgfd_target", "default_hmc_config", "default_mh_config", "hmc_step",
    "init_state", "mh_step", "run_chain",
    "__version__",
]
