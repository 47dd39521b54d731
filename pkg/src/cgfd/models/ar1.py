"""Stationary AR(1) covariance as a two-dimensional level set.

The n x n covariance is factored as Sigma = Q Lambda^2 Q' with Q the Cayley
transform (I - A)(I + A)^{-1} of a skew-symmetric A and Lambda diagonal
positive.  The parameter vector stacks the strict upper triangle of A (row
major) followed by the diagonal of Lambda.  Toeplitz and geometric-decay
constraints on Sigma pin the AR(1) structure, leaving a two-dimensional
manifold in the n(n-1)/2 + n ambient parameters.
"""

import numpy as np

from ..errors import BadShape, CayleySingular, CovarianceNotSPD
from ..geometry import ImplicitManifold
from ..kernels import FiducialModel

_LOG_2PI = np.log(2.0 * np.pi)


def _triu_indices(n: int):
    return np.triu_indices(n, k=1)


def split_params(vec: np.ndarray, n: int):
    """Parameter vector -> (A, lam): skew-symmetric matrix and diagonal."""
    vec = np.asarray(vec, dtype=float)
    m = n * (n - 1) // 2
    if vec.size != m + n:
        raise BadShape(f"expected parameter vector of length {m + n}, got {vec.size}")
    A = np.zeros((n, n))
    rows, cols = _triu_indices(n)
    A[rows, cols] = vec[:m]
    A -= A.T
    return A, vec[m:]


def join_params(A: np.ndarray, lam: np.ndarray) -> np.ndarray:
    rows, cols = _triu_indices(A.shape[0])
    return np.concatenate([A[rows, cols], np.asarray(lam, dtype=float)])


def _cayley(A: np.ndarray) -> np.ndarray:
    """(I - A)(I + A)^{-1}; orthogonal for skew-symmetric A."""
    n = A.shape[0]
    eye = np.eye(n)
    try:
        Q = np.linalg.solve(eye + A, eye - A)
    except np.linalg.LinAlgError as exc:
        raise CayleySingular("I + A is singular") from exc
    if not np.all(np.isfinite(Q)):
        raise CayleySingular("Cayley transform overflowed")
    return Q


def covariance_from_params(vec: np.ndarray, n: int) -> np.ndarray:
    A, lam = split_params(vec, n)
    if np.any(lam <= 0.0):
        raise CovarianceNotSPD("Lambda diagonal must be strictly positive")
    Q = _cayley(A)
    return (Q * lam ** 2) @ Q.T


def ar1_covariance(rho: float, sigma: float, n: int) -> np.ndarray:
    """Toeplitz AR(1) covariance sigma^2 rho^|i-j| / (1 - rho^2)."""
    if not abs(rho) < 1.0:
        raise ValueError("|rho| must be < 1 for stationarity")
    idx = np.arange(n)
    return sigma ** 2 / (1.0 - rho ** 2) * rho ** np.abs(idx[:, None] - idx[None, :])


def params_from_covariance(Sigma: np.ndarray) -> np.ndarray:
    """Inverse construction: eigendecompose Sigma and invert the Cayley map.

    Any valid (A, Lambda) with Sigma(A, Lambda) = Sigma serves as a feasible
    starting point; the eigenvector matrix is sign-fixed to determinant +1.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    w, V = np.linalg.eigh(0.5 * (Sigma + Sigma.T))
    if np.any(w <= 0.0):
        raise CovarianceNotSPD("covariance has non-positive eigenvalues")
    if np.linalg.det(V) < 0:
        V = V.copy()
        V[:, 0] = -V[:, 0]
    n = Sigma.shape[0]
    eye = np.eye(n)
    try:
        A = np.linalg.solve(eye + V, eye - V)
    except np.linalg.LinAlgError as exc:
        raise CayleySingular("I + Q is singular; rotation has a -1 eigenvalue") from exc
    A = 0.5 * (A - A.T)  # symmetrize away round-off; exact result is skew
    return join_params(A, np.sqrt(w))


def rho_sigma_from_params(vec: np.ndarray, n: int):
    """Recover (rho, sigma) from the implied covariance's leading entries."""
    Sigma = covariance_from_params(vec, n)
    rho = Sigma[0, 1] / Sigma[0, 0]
    sigma_sq = Sigma[0, 0] * (1.0 - rho ** 2)
    return float(rho), float(np.sqrt(max(sigma_sq, 0.0)))


def simulate_ar1(rho: float, sigma: float, n: int, rng: np.random.Generator) -> np.ndarray:
    Sigma = ar1_covariance(rho, sigma, n)
    return np.linalg.cholesky(Sigma) @ rng.standard_normal(n)


def _constraints_from_cov(Sigma: np.ndarray, n: int) -> np.ndarray:
    i, j = np.triu_indices(n - 1)
    toeplitz = Sigma[i, j] - Sigma[i + 1, j + 1]
    r0 = Sigma[0, :]
    k = np.arange(1, n - 1)
    decay = r0[k] ** 2 - r0[k - 1] * r0[k + 1]
    return np.concatenate([toeplitz, decay])


def ar1_model(data) -> tuple[FiducialModel, ImplicitManifold]:
    """Build the AR(1) model from one realization of the process.

    The DGA is a zero-mean multivariate normal draw through the Cayley
    factorization; both the constraint gradient and the DGA gradient are
    assembled analytically from the closed-form partials of Sigma.
    """
    data = np.atleast_1d(np.asarray(data, dtype=float))
    n = data.size
    if data.ndim != 1 or n < 3:
        raise BadShape("need a single realization of length >= 3")
    m = n * (n - 1) // 2
    ambient = m + n
    codim = n * (n + 1) // 2 - 2
    rows_a, cols_a = _triu_indices(n)
    eye = np.eye(n)
    ci, cj = np.triu_indices(n - 1)

    def _factors(vec):
        A, lam = split_params(vec, n)
        if np.any(lam <= 0.0):
            raise CovarianceNotSPD("Lambda diagonal must be strictly positive")
        try:
            W = np.linalg.inv(eye + A)
        except np.linalg.LinAlgError as exc:
            raise CayleySingular("I + A is singular") from exc
        Q = W @ (eye - A)
        return A, lam, W, Q

    def g(vec):
        _, lam, _, Q = _factors(vec)
        Sigma = (Q * lam ** 2) @ Q.T
        return _constraints_from_cov(Sigma, n)

    def _sigma_partials(vec):
        """dSigma/dp for every parameter, shape (ambient, n, n)."""
        A, lam, W, Q = _factors(vec)
        Sigma = (Q * lam ** 2) @ Q.T
        V = (W * lam ** 2) @ Q.T      # (I+A)^-1 Lambda^2 (I-A)^-1 (I+A) = W Lam^2 Q'
        # d Sigma / d A_{qr} = 2 (B + B') with B = outer(W[:, r], V[q, :]) - outer(W[:, q], V[r, :])
        B = np.einsum("ip,pj->pij", W[:, cols_a], V[rows_a, :]) \
            - np.einsum("ip,pj->pij", W[:, rows_a], V[cols_a, :])
        dS = np.empty((ambient, n, n))
        dS[:m] = 2.0 * (B + B.transpose(0, 2, 1))
        # d Sigma / d lam_s = 2 lam_s outer(Q[:, s], Q[:, s])
        dS[m:] = 2.0 * lam[:, None, None] * np.einsum("is,js->sij", Q, Q)
        return Sigma, dS, (A, lam, W, Q)

    def grad_g(vec):
        Sigma, dS, _ = _sigma_partials(vec)
        toe = dS[:, ci, cj] - dS[:, ci + 1, cj + 1]          # (ambient, n_toeplitz)
        r0 = Sigma[0, :]
        dr0 = dS[:, 0, :]                                     # (ambient, n)
        k = np.arange(1, n - 1)
        decay = 2.0 * r0[k] * dr0[:, k] - dr0[:, k - 1] * r0[k + 1] - r0[k - 1] * dr0[:, k + 1]
        return np.concatenate([toe, decay], axis=1).T         # (codim, ambient)

    def dga_gradient(vec):
        _, lam, W, Q = _factors(vec)
        qty = Q.T @ data
        w_tilde = W @ qty
        cols_A = 2.0 * (W[:, cols_a] * w_tilde[rows_a] - W[:, rows_a] * w_tilde[cols_a])
        cols_L = Q * (qty / lam)[None, :]
        return np.concatenate([cols_A, cols_L], axis=1)

    def log_likelihood(vec):
        _, lam, _, Q = _factors(vec)
        z = (Q.T @ data) / lam
        return float(-0.5 * n * _LOG_2PI - np.sum(np.log(lam)) - 0.5 * z @ z)

    model = FiducialModel(
        data=data,
        log_likelihood=log_likelihood,
        dga_gradient=dga_gradient,
    )
    manifold = ImplicitManifold(ambient_dim=ambient, codim=codim, g=g, grad_g=grad_g)
    return model, manifold
