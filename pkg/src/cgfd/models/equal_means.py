"""Two bivariate normal observations with the means constrained equal.

Parameter vector theta = (mu1, mu2, sigma1, sigma2) with data-generating map
``x_i = mu + diag(sigma1, sigma2) z_i``.  The same zero set is exposed through
two constraint functions (the difference of means and the difference of
cubes) to exercise constraint-invariance, plus a direct three-parameter
reparameterization whose Jacobian scale differs by exactly sqrt(2).
"""

import numpy as np

from ..errors import BadShape
from ..geometry import ImplicitManifold
from ..kernels import Chart, FiducialModel

_DIM = 4
_LOG_2PI = np.log(2.0 * np.pi)


def equal_means_manifold() -> ImplicitManifold:
    """g(theta) = mu2 - mu1."""

    def g(theta):
        return np.array([theta[1] - theta[0]])

    grad = np.array([[-1.0, 1.0, 0.0, 0.0]])
    zero = np.zeros((1, _DIM))
    return ImplicitManifold(
        ambient_dim=_DIM, codim=1,
        g=g,
        grad_g=lambda theta: grad,
        grad_g_derivative=lambda theta, i: zero,
    )


def equal_means_cubic_manifold() -> ImplicitManifold:
    """Same zero set expressed as h(theta) = mu2^3 - mu1^3."""

    def g(theta):
        return np.array([theta[1] ** 3 - theta[0] ** 3])

    def grad_g(theta):
        return np.array([[-3.0 * theta[0] ** 2, 3.0 * theta[1] ** 2, 0.0, 0.0]])

    def grad_g_derivative(theta, i):
        row = np.zeros((1, _DIM))
        if i == 0:
            row[0, 0] = -6.0 * theta[0]
        elif i == 1:
            row[0, 1] = 6.0 * theta[1]
        return row

    return ImplicitManifold(ambient_dim=_DIM, codim=1, g=g, grad_g=grad_g,
                            grad_g_derivative=grad_g_derivative)


def _check_data(data) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if data.shape != (2, 2):
        raise BadShape(f"expected exactly two bivariate observations (2, 2), got {data.shape}")
    return data


def equal_means_model(data) -> tuple[FiducialModel, ImplicitManifold]:
    """Four-parameter model with the mu2 - mu1 constraint."""
    data = _check_data(data)

    def log_likelihood(theta):
        mu = theta[:2]
        sigma = theta[2:]
        z = (data - mu) / sigma
        return float(-2.0 * _LOG_2PI - 2.0 * np.sum(np.log(sigma)) - 0.5 * np.sum(z * z))

    def log_likelihood_gradient(theta):
        mu = theta[:2]
        sigma = theta[2:]
        resid = data - mu
        d_mu = resid.sum(axis=0) / sigma ** 2
        d_sigma = -2.0 / sigma + (resid ** 2).sum(axis=0) / sigma ** 3
        return np.concatenate([d_mu, d_sigma])

    def dga_gradient(theta):
        mu = theta[:2]
        sigma = theta[2:]
        J = np.zeros((4, 4))
        for i in range(2):          # observation index
            for k in range(2):      # component index
                row = 2 * i + k
                J[row, k] = 1.0
                J[row, 2 + k] = (data[i, k] - mu[k]) / sigma[k]
        return J

    def dga_gradient_derivative(theta, i):
        mu = theta[:2]
        sigma = theta[2:]
        dJ = np.zeros((4, 4))
        if i in (0, 1):
            k = i
            for obs in range(2):
                dJ[2 * obs + k, 2 + k] = -1.0 / sigma[k]
        else:
            k = i - 2
            for obs in range(2):
                dJ[2 * obs + k, 2 + k] = -(data[obs, k] - mu[k]) / sigma[k] ** 2
        return dJ

    model = FiducialModel(
        data=data,
        log_likelihood=log_likelihood,
        dga_gradient=dga_gradient,
        dga_gradient_derivative=dga_gradient_derivative,
        log_likelihood_gradient=log_likelihood_gradient,
    )
    return model, equal_means_manifold()


def equal_means_direct_model(data) -> FiducialModel:
    """Three-parameter reparameterization (mu, sigma1, sigma2) with mu shared."""
    data = _check_data(data)

    def log_likelihood(theta3):
        mu = np.array([theta3[0], theta3[0]])
        sigma = theta3[1:]
        z = (data - mu) / sigma
        return float(-2.0 * _LOG_2PI - 2.0 * np.sum(np.log(sigma)) - 0.5 * np.sum(z * z))

    def dga_gradient(theta3):
        mu, sigma = theta3[0], theta3[1:]
        J = np.zeros((4, 3))
        for i in range(2):
            for k in range(2):
                row = 2 * i + k
                J[row, 0] = 1.0
                J[row, 1 + k] = (data[i, k] - mu) / sigma[k]
        return J

    return FiducialModel(data=data, log_likelihood=log_likelihood, dga_gradient=dga_gradient)


def equal_means_chart(bound: float = 1e6, sigma_floor: float = 1e-8) -> Chart:
    """Global chart (mu, sigma1, sigma2) -> (mu, mu, sigma1, sigma2)."""
    gradient = np.array([
        [1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ])
    lower = np.array([-bound, sigma_floor, sigma_floor])
    upper = np.array([bound, bound, bound])

    def psi_inverse(u):
        return np.array([u[0], u[0], u[1], u[2]])

    return Chart(
        intrinsic_dim=3,
        psi_inverse=psi_inverse,
        psi_inverse_gradient=lambda u: gradient,
        domain=(lower, upper),
    )
