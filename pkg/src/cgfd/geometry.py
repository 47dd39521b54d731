"""Differential-geometric substrate for level-set constrained parameter spaces.

A manifold is given implicitly as the zero set of a smooth constraint
``g: R^d -> R^t``.  This module computes the objects the rest of the package
consumes at a point of that level set: the projection onto the tangent space,
orthonormal tangent/normal frames, determinant-like scales of rank-deficient
Jacobians, and Newton projection of nearby ambient points back onto the
level set.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import RankDeficient

# Double-precision working tolerances.
TOL_ON = 1e-8           # feasibility: ||g(theta)|| at most this to count as on-manifold
TOL_PROJECT = 1e-10     # Newton target for projections
MAX_NEWTON_ITERS = 50
RANK_EPS_FACTOR = 1e-10  # relative singular-value cutoff for rank decisions
COND_MAX = 1e12          # condition-number ceiling for grad_g @ grad_g.T


@dataclass(frozen=True)
class ImplicitManifold:
    """Level set ``{theta in R^d : g(theta) = 0}`` of codimension ``t``.

    ``g`` maps a d-vector to a t-vector and ``grad_g`` returns the t x d
    matrix whose rows are the gradients of the components of ``g``.
    ``grad_g_derivative(theta, i)``, when supplied, returns the elementwise
    partial derivative of that matrix with respect to ``theta[i]``; it enables
    analytic projection-matrix derivatives in gradient computations.
    """

    ambient_dim: int
    codim: int
    g: Callable[[np.ndarray], np.ndarray]
    grad_g: Callable[[np.ndarray], np.ndarray]
    grad_g_derivative: Optional[Callable[[np.ndarray, int], np.ndarray]] = None

    def __post_init__(self):
        if not (0 < self.codim < self.ambient_dim):
            raise ValueError("need 0 < codim < ambient_dim")

    @property
    def intrinsic_dim(self) -> int:
        return self.ambient_dim - self.codim

    def constraint_norm(self, theta) -> float:
        return float(np.linalg.norm(np.atleast_1d(self.g(np.asarray(theta, dtype=float)))))

    def is_feasible(self, theta, tol: float = TOL_ON) -> bool:
        return self.constraint_norm(theta) <= tol


@dataclass(frozen=True)
class TangentFrame:
    """Orthonormal bases at a point: ``Q`` spans the tangent space
    (null space of grad_g), ``Q_perp`` spans the normal space (row space)."""

    point: np.ndarray
    Q: np.ndarray        # d x (d - t)
    Q_perp: np.ndarray   # d x t

    @property
    def projection(self) -> np.ndarray:
        """Tangent-space projection matrix Q @ Q.T."""
        return self.Q @ self.Q.T


def _fix_column_signs(V: np.ndarray) -> np.ndarray:
    """Make each column's first significantly-nonzero entry nonnegative.

    Pins the SVD's column-sign ambiguity so frames are deterministic.
    """
    V = V.copy()
    for j in range(V.shape[1]):
        col = V[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * max(1.0, np.abs(col).max()))
        if nz.size and col[nz[0]] < 0:
            V[:, j] = -col
    return V


def _checked_grad_svd(m: ImplicitManifold, theta: np.ndarray):
    """SVD of grad_g(theta) with rank and conditioning checks.

    Returns (grad, U, s, Vt).  Raises RankDeficient when the smallest of the
    t singular values falls below the relative cutoff or the implied
    condition number of grad_g @ grad_g.T exceeds COND_MAX (redundant
    constraints).
    """
    grad = np.atleast_2d(np.asarray(m.grad_g(theta), dtype=float))
    if grad.shape != (m.codim, m.ambient_dim):
        raise ValueError(
            f"grad_g returned shape {grad.shape}, expected {(m.codim, m.ambient_dim)}"
        )
    U, s, Vt = np.linalg.svd(grad, full_matrices=True)
    if s[0] == 0.0 or not np.all(np.isfinite(s)):
        raise RankDeficient("constraint gradient is zero or non-finite")
    if s[m.codim - 1] <= RANK_EPS_FACTOR * s[0]:
        raise RankDeficient(
            f"grad_g row rank < {m.codim}: singular values {s}"
        )
    if (s[0] / s[m.codim - 1]) ** 2 > COND_MAX:
        raise RankDeficient(
            "grad_g @ grad_g.T condition number exceeds "
            f"{COND_MAX:g}; constraints look redundant"
        )
    return grad, U, s, Vt


def projection_matrix(m: ImplicitManifold, theta) -> np.ndarray:
    """Projection onto the null space of grad_g at ``theta``:
    ``P = I - G.T @ inv(G @ G.T) @ G``.

    Symmetric, idempotent, trace d - t.  Raises RankDeficient for redundant
    constraints.
    """
    theta = np.asarray(theta, dtype=float)
    grad, _, _, _ = _checked_grad_svd(m, theta)
    gram = grad @ grad.T
    P = np.eye(m.ambient_dim) - grad.T @ np.linalg.solve(gram, grad)
    return 0.5 * (P + P.T)


def tangent_frame(m: ImplicitManifold, theta) -> TangentFrame:
    """Orthonormal tangent/normal bases at ``theta`` from the SVD of grad_g.

    Deterministic for fixed input: column signs follow the
    first-nonzero-entry-nonnegative convention.
    """
    theta = np.asarray(theta, dtype=float)
    _, _, _, Vt = _checked_grad_svd(m, theta)
    V = Vt.T
    Q_perp = _fix_column_signs(V[:, : m.codim])
    Q = _fix_column_signs(V[:, m.codim:])
    return TangentFrame(point=theta, Q=Q, Q_perp=Q_perp)


def log_pseudo_det_scale(M, frame: TangentFrame) -> float:
    """log of ``pseudo_det_scale``; ``-inf`` when the scale degenerates to 0."""
    B = np.asarray(M, dtype=float) @ frame.Q
    gram = B.T @ B
    gram = 0.5 * (gram + gram.T)
    eigs = np.linalg.eigvalsh(gram)
    if eigs.size == 0 or np.any(eigs <= 0.0) or not np.all(np.isfinite(eigs)):
        return -np.inf
    return 0.5 * float(np.sum(np.log(eigs)))


def pseudo_det_scale(M, frame: TangentFrame) -> float:
    """Determinant-like scale of ``M`` restricted to the tangent space.

    Computes ``sqrt(det(Q.T M.T M Q))``, the square root of the product of
    the d - t nonzero eigenvalues of ``P M.T M P``.  Returns 0.0 when the
    restricted Gram matrix is not positive-definite (degenerate gradient);
    never negative.
    """
    log_val = log_pseudo_det_scale(M, frame)
    return float(np.exp(log_val)) if np.isfinite(log_val) else 0.0


def project_to_manifold(m: ImplicitManifold, y0, frame_at_x: TangentFrame,
                        tol: float = TOL_PROJECT,
                        max_iters: int = MAX_NEWTON_ITERS) -> Optional[np.ndarray]:
    """Project ``y0`` onto the level set along the normal space at ``frame_at_x``.

    Solves ``g(y0 + Q_perp @ a) = 0`` for ``a`` by Newton iteration.  This is
    projection along a fixed normal frame, not the nearest-point projection.
    Returns the projected point, or None when Newton fails to converge within
    ``max_iters`` or its t x t system becomes singular; callers treat None as
    "reject proposal".
    """
    y0 = np.asarray(y0, dtype=float)
    Q_perp = frame_at_x.Q_perp
    a = np.zeros(m.codim)
    for _ in range(max_iters):
        y = y0 + Q_perp @ a
        residual = np.atleast_1d(np.asarray(m.g(y), dtype=float))
        if not np.all(np.isfinite(residual)):
            return None
        if np.linalg.norm(residual) <= tol:
            return y
        jac = np.atleast_2d(np.asarray(m.grad_g(y), dtype=float)) @ Q_perp
        try:
            delta = np.linalg.solve(jac, residual)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(delta)):
            return None
        a = a - delta
    return None
