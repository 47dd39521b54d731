"""Fiducial density kernels on ambient and constrained parameter spaces.

All kernels are unnormalized log densities.  Normalization is done explicitly
by chart quadrature (:mod:`cgfd.quadrature`) or implicitly by the MCMC
samplers (:mod:`cgfd.samplers`).
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import numdiff
from .errors import DegenerateJacobian, OffManifold, OutOfDomain, PseudoinverseFailure
from .geometry import (
    RANK_EPS_FACTOR,
    TOL_ON,
    ImplicitManifold,
    TangentFrame,
    log_pseudo_det_scale,
    projection_matrix,
    tangent_frame,
)


@dataclass(frozen=True)
class FiducialModel:
    """A data-generating algorithm's statistical ingredients.

    ``dga_gradient(theta)`` is the gradient of the data-generating map with
    respect to the parameter, evaluated at the noise values that reproduce the
    observed data; shape n_out x d.  ``dga_gradient_derivative(theta, i)``
    (optional) is its elementwise partial with respect to ``theta[i]``.
    Models are immutable after construction and safe to evaluate concurrently.
    """

    data: object
    log_likelihood: Callable[[np.ndarray], float]
    dga_gradient: Callable[[np.ndarray], np.ndarray]
    dga_gradient_derivative: Optional[Callable[[np.ndarray, int], np.ndarray]] = None
    log_likelihood_gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass(frozen=True)
class Chart:
    """Global parameterization ``u -> theta`` of a manifold over a box domain.

    ``psi_inverse_gradient(u)`` is the d x (d - t) matrix of partials of the
    embedding map.  ``domain`` is an open axis-aligned box (lower, upper).
    """

    intrinsic_dim: int
    psi_inverse: Callable[[np.ndarray], np.ndarray]
    psi_inverse_gradient: Callable[[np.ndarray], np.ndarray]
    domain: tuple

    def contains(self, u) -> bool:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        lower, upper = (np.asarray(b, dtype=float) for b in self.domain)
        return bool(np.all(u > lower) and np.all(u < upper))

    def area_element(self, u) -> float:
        """sqrt of the Gram determinant of the embedding gradient at ``u``."""
        C = np.atleast_2d(np.asarray(self.psi_inverse_gradient(np.atleast_1d(u)), dtype=float))
        gram = C.T @ C
        det = np.linalg.det(0.5 * (gram + gram.T))
        return float(np.sqrt(det)) if det > 0.0 else 0.0


def log_det_scale(M) -> float:
    """``log sqrt(det(M.T @ M))`` for a full-column-rank matrix.

    Raises DegenerateJacobian when M has fewer rows than columns or the Gram
    determinant is not strictly positive.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] < M.shape[1]:
        raise DegenerateJacobian(
            f"gradient matrix is {M.shape[0]} x {M.shape[1]}: fewer outputs than parameters"
        )
    gram = M.T @ M
    sign, logdet = np.linalg.slogdet(0.5 * (gram + gram.T))
    if sign <= 0 or not np.isfinite(logdet):
        raise DegenerateJacobian("DGA gradient Gram matrix is singular")
    return 0.5 * float(logdet)


def gfd_log_kernel(model: FiducialModel, theta) -> float:
    """Unconstrained fiducial log kernel: log-likelihood plus the log
    determinant scale of the DGA gradient."""
    theta = np.asarray(theta, dtype=float)
    return float(model.log_likelihood(theta)) + log_det_scale(model.dga_gradient(theta))


def cgfd_log_kernel(model: FiducialModel, m: ImplicitManifold, theta,
                    frame: Optional[TangentFrame] = None) -> float:
    """Constrained fiducial log kernel at a feasible point.

    The Jacobian factor is the pseudodeterminant scale of the DGA gradient
    restricted to the tangent space at ``theta``.  Pass a precomputed
    ``frame`` to skip the SVD when one is already available.
    """
    theta = np.asarray(theta, dtype=float)
    if not m.is_feasible(theta):
        raise OffManifold(f"||g(theta)|| = {m.constraint_norm(theta):.3e} > {TOL_ON:g}")
    if frame is None:
        frame = tangent_frame(m, theta)
    log_scale = log_pseudo_det_scale(model.dga_gradient(theta), frame)
    if not np.isfinite(log_scale):
        raise DegenerateJacobian("pseudodeterminant scale of DGA gradient is zero")
    return float(model.log_likelihood(theta)) + log_scale


def parameterized_gfd_log_kernel(model: FiducialModel, chart: Chart, u) -> float:
    """Fiducial log kernel of the chart-reparameterized DGA at coordinates ``u``:
    the chain-rule composition of the DGA gradient with the embedding gradient."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if not chart.contains(u):
        raise OutOfDomain(f"u = {u} outside chart domain {chart.domain}")
    theta = np.asarray(chart.psi_inverse(u), dtype=float)
    composed = np.asarray(model.dga_gradient(theta), dtype=float) @ \
        np.atleast_2d(np.asarray(chart.psi_inverse_gradient(u), dtype=float))
    return float(model.log_likelihood(theta)) + log_det_scale(composed)


def hwang_log_kernel(model: FiducialModel, m: ImplicitManifold, theta) -> float:
    """Extrinsic log kernel: the ambient fiducial kernel concentrated onto the
    manifold, with correction ``-1/2 log det(grad_g @ grad_g.T)``.

    Unlike the constrained kernel this depends on the functional form of the
    constraint, not just its zero set.
    """
    theta = np.asarray(theta, dtype=float)
    if not m.is_feasible(theta):
        raise OffManifold(f"||g(theta)|| = {m.constraint_norm(theta):.3e} > {TOL_ON:g}")
    grad = np.atleast_2d(np.asarray(m.grad_g(theta), dtype=float))
    gram = grad @ grad.T
    sign, logdet = np.linalg.slogdet(0.5 * (gram + gram.T))
    if sign <= 0 or not np.isfinite(logdet):
        raise DegenerateJacobian("grad_g Gram matrix is singular")
    return gfd_log_kernel(model, theta) - 0.5 * float(logdet)


def _dga_gradient_derivative(model: FiducialModel, theta: np.ndarray, i: int) -> np.ndarray:
    if model.dga_gradient_derivative is not None:
        return np.asarray(model.dga_gradient_derivative(theta, i), dtype=float)
    h = numdiff.step_size(theta[i])
    tp = theta.copy()
    tm = theta.copy()
    tp[i] += h
    tm[i] -= h
    return (np.asarray(model.dga_gradient(tp), dtype=float)
            - np.asarray(model.dga_gradient(tm), dtype=float)) / (2.0 * h)


def _projection_derivative(m: ImplicitManifold, theta: np.ndarray, i: int,
                           grad: np.ndarray, gram_inv_grad: np.ndarray) -> np.ndarray:
    """Partial derivative of the projection matrix along ``theta[i]``.

    Analytic when the manifold supplies grad_g_derivative, otherwise central
    finite differences of the projection matrix (grad_g is an ambient
    function, so off-manifold evaluations are well defined).
    """
    if m.grad_g_derivative is None:
        h = numdiff.step_size(theta[i])
        tp = theta.copy()
        tm = theta.copy()
        tp[i] += h
        tm[i] -= h
        return (projection_matrix(m, tp) - projection_matrix(m, tm)) / (2.0 * h)
    dgrad = np.atleast_2d(np.asarray(m.grad_g_derivative(theta, i), dtype=float))
    # P = I - G.T K G with K = (G G.T)^-1 and dK = -K dGram K, so
    # dP = -(dG.T KG + (dG.T KG).T) + (KG).T dGram (KG) with KG = K G.
    KG = gram_inv_grad
    dgram = dgrad @ grad.T + grad @ dgrad.T
    edge = dgrad.T @ KG
    dP = -(edge + edge.T) + KG.T @ dgram @ KG
    return 0.5 * (dP + dP.T)


def _tangent_restricted_spectrum(J: np.ndarray, Q: np.ndarray):
    """Eigen-decomposition of the nonzero spectrum of J P J' via the tangent
    restriction: eigenvalues of (JQ)'(JQ) with orthonormal left vectors in
    the ambient output space."""
    B = J @ Q
    gram = B.T @ B
    gram = 0.5 * (gram + gram.T)
    w, V = np.linalg.eigh(gram)
    if w[0] <= RANK_EPS_FACTOR * max(w[-1], 0.0) or w[-1] <= 0.0:
        raise PseudoinverseFailure(
            "cannot separate the tangent-restricted spectrum from the null "
            f"spectrum: eigenvalues {w}"
        )
    U = (B @ V) / np.sqrt(w)
    return w, U


def cgfd_grad_log(model: FiducialModel, m: ImplicitManifold, theta,
                  frame: Optional[TangentFrame] = None) -> np.ndarray:
    """Ambient-coordinate gradient of the constrained fiducial log kernel.

    Per coordinate ``i`` this is the log-likelihood partial plus
    ``1/2 Tr[(J P J')^+ d(J P J')/d theta_i]`` with ``J`` the DGA gradient and
    ``P`` the tangent projection; the pseudoinverse trace is evaluated through
    a symmetric eigensolve of the tangent-restricted Gram matrix.
    """
    theta = np.asarray(theta, dtype=float)
    if not m.is_feasible(theta):
        raise OffManifold(f"||g(theta)|| = {m.constraint_norm(theta):.3e} > {TOL_ON:g}")
    if frame is None:
        frame = tangent_frame(m, theta)

    J = np.asarray(model.dga_gradient(theta), dtype=float)
    P = frame.projection
    w, U = _tangent_restricted_spectrum(J, frame.Q)

    grad = np.atleast_2d(np.asarray(m.grad_g(theta), dtype=float))
    gram = grad @ grad.T
    gram_inv_grad = np.linalg.solve(0.5 * (gram + gram.T), grad)

    if model.log_likelihood_gradient is not None:
        score = np.asarray(model.log_likelihood_gradient(theta), dtype=float).copy()
    else:
        score = numdiff.central_gradient(model.log_likelihood, theta)

    # Precompute the small factors of U' dS U so the n_out x n_out matrix
    # dS = dJ P J' + J dP J' + J P dJ' is never formed.
    UtJ = U.T @ J              # r x d
    PJtU = P @ (J.T @ U)       # d x r
    UtJP = UtJ @ P             # r x d
    inv_w = 1.0 / w
    for i in range(theta.size):
        dJ = _dga_gradient_derivative(model, theta, i)
        dP = _projection_derivative(m, theta, i, grad, gram_inv_grad)
        T = (U.T @ dJ) @ PJtU + UtJ @ (dP @ (J.T @ U)) + UtJP @ (dJ.T @ U)
        score[i] += 0.5 * float(np.sum(np.diag(T) * inv_w))
    return score


def gfd_grad_log(model: FiducialModel, theta) -> np.ndarray:
    """Score of the unconstrained fiducial log kernel:
    log-likelihood partials plus ``1/2 Tr[(J'J)^-1 d(J'J)/d theta_i]``."""
    theta = np.asarray(theta, dtype=float)
    J = np.asarray(model.dga_gradient(theta), dtype=float)
    gram = J.T @ J
    gram = 0.5 * (gram + gram.T)
    if model.log_likelihood_gradient is not None:
        score = np.asarray(model.log_likelihood_gradient(theta), dtype=float).copy()
    else:
        score = numdiff.central_gradient(model.log_likelihood, theta)
    for i in range(theta.size):
        dJ = _dga_gradient_derivative(model, theta, i)
        dgram = dJ.T @ J
        dgram = dgram + dgram.T
        score[i] += 0.5 * float(np.trace(np.linalg.solve(gram, dgram)))
    return score
