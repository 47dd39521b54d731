"""Trivariate normal with the mean constrained to the unit sphere.

Observations are i.i.d. N3(mu, I) with ||mu|| = 1.  The data-generating map is
``x = mu + z``, so its gradient is a stack of identity matrices and the
constrained Jacobian factor is constant over the sphere.
"""

import numpy as np

from ..errors import BadShape, EmptyData
from ..geometry import ImplicitManifold
from ..kernels import FiducialModel


def unit_sphere_manifold(dim: int = 3) -> ImplicitManifold:
    """Level set of g(mu) = ||mu|| - 1 in R^dim."""

    def g(mu):
        return np.array([np.linalg.norm(mu) - 1.0])

    def grad_g(mu):
        return (mu / np.linalg.norm(mu)).reshape(1, -1)

    def grad_g_derivative(mu, i):
        r = np.linalg.norm(mu)
        row = -mu * mu[i] / r ** 3
        row[i] += 1.0 / r
        return row.reshape(1, -1)

    return ImplicitManifold(ambient_dim=dim, codim=1, g=g, grad_g=grad_g,
                            grad_g_derivative=grad_g_derivative)


def sphere_model(data) -> tuple[FiducialModel, ImplicitManifold]:
    """Build the sphere-constrained mean model from an (n, 3) data matrix."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.size == 0:
        raise EmptyData("sphere model needs at least one observation")
    if data.ndim != 2 or data.shape[1] != 3:
        raise BadShape(f"expected an (n, 3) data matrix, got {data.shape}")
    n = data.shape[0]
    dim = 3

    total = data.sum(axis=0)
    sum_sq = float(np.sum(data * data))
    const = -0.5 * n * dim * np.log(2.0 * np.pi)
    stacked_identity = np.tile(np.eye(dim), (n, 1))
    zero_derivative = np.zeros((n * dim, dim))

    def log_likelihood(mu):
        return const - 0.5 * (sum_sq - 2.0 * float(total @ mu) + n * float(mu @ mu))

    def log_likelihood_gradient(mu):
        return total - n * mu

    model = FiducialModel(
        data=data,
        log_likelihood=log_likelihood,
        dga_gradient=lambda mu: stacked_identity,
        dga_gradient_derivative=lambda mu, i: zero_derivative,
        log_likelihood_gradient=log_likelihood_gradient,
    )
    return model, unit_sphere_manifold(dim)
