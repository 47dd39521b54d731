"""MCMC kernels on implicitly constrained parameter spaces.

Two samplers target an unnormalized log kernel restricted to the level set
``g(theta) = 0``:

* a constrained Hamiltonian sampler whose leapfrog steps solve Lagrange
  multipliers so positions stay on the level set and momenta stay tangent
  (the RATTLE scheme), and
* a tangent-space random-walk Metropolis-Hastings sampler that projects
  pre-proposals onto the level set along normal directions and verifies that
  the reverse move returns to the *initial point*, not merely to the
  manifold.

Both treat every numerical failure (projection divergence, singular
multiplier systems, degenerate kernels) as a proposal rejection; no errors
escape a step.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import CgfdError, InfeasibleInit
from .geometry import (
    MAX_NEWTON_ITERS,
    TOL_PROJECT,
    ImplicitManifold,
    TangentFrame,
    project_to_manifold,
    tangent_frame,
)
from .kernels import FiducialModel, cgfd_grad_log, cgfd_log_kernel


@dataclass(frozen=True)
class Target:
    """A sampling target: manifold plus log-kernel (and optional gradient).

    ``log_kernel(theta, frame)`` and ``grad_log_kernel(theta, frame)`` receive
    the tangent frame already computed by the sampler; kernels that do not
    need it may ignore it.
    """

    manifold: ImplicitManifold
    log_kernel: Callable[[np.ndarray, TangentFrame], float]
    grad_log_kernel: Optional[Callable[[np.ndarray, TangentFrame], np.ndarray]] = None


def cgfd_target(model: FiducialModel, manifold: ImplicitManifold) -> Target:
    """Bundle a fiducial model and manifold into a constrained sampling target."""
    return Target(
        manifold=manifold,
        log_kernel=lambda theta, frame: cgfd_log_kernel(model, manifold, theta, frame),
        grad_log_kernel=lambda theta, frame: cgfd_grad_log(model, manifold, theta, frame),
    )


@dataclass
class ChainStats:
    proposals: int = 0
    accepts: int = 0
    projection_failures: int = 0
    reverse_check_failures: int = 0

    def acceptance_rate(self) -> float:
        return self.accepts / self.proposals if self.proposals else 0.0


@dataclass
class ChainState:
    """Current chain position with cached kernel value and tangent frame.

    The ``stats`` object is shared across the steps of one chain and mutated
    in place.
    """

    theta: np.ndarray
    log_kernel: float
    frame: TangentFrame
    stats: ChainStats = field(default_factory=ChainStats)


@dataclass(frozen=True)
class HmcConfig:
    """Constrained Hamiltonian sampler settings.

    ``mass`` is a symmetric positive-definite matrix (identity when None).
    The default step size follows the 0.1/sqrt(d) heuristic when built via
    :func:`default_hmc_config`.
    """

    step_size: float
    n_leapfrog: int = 20
    mass: Optional[np.ndarray] = None
    seed: int = 0

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.n_leapfrog < 0:
            raise ValueError("n_leapfrog must be nonnegative")
        if self.mass is not None:
            np.linalg.cholesky(np.asarray(self.mass))  # SPD check


@dataclass(frozen=True)
class MhConfig:
    """Tangent-proposal Metropolis-Hastings settings.

    ``reverse_tol`` bounds the distance between the reverse projection and the
    chain's current point.  ``check_reverse_point=False`` downgrades the
    reverse check to "returned anywhere on the manifold"; that variant is
    biased and exists only so tests can demonstrate the bias.
    """

    tangent_scale: float
    seed: int = 0
    reverse_tol: float = 1e-6
    check_reverse_point: bool = True

    def __post_init__(self):
        if self.tangent_scale < 0:
            raise ValueError("tangent_scale must be nonnegative")


def default_hmc_config(ambient_dim: int, seed: int = 0, **overrides) -> HmcConfig:
    kwargs = {"step_size": 0.1 / np.sqrt(ambient_dim), "n_leapfrog": 20, "seed": seed}
    kwargs.update(overrides)
    return HmcConfig(**kwargs)


def default_mh_config(intrinsic_dim: int, seed: int = 0, **overrides) -> MhConfig:
    kwargs = {"tangent_scale": 0.5 / np.sqrt(intrinsic_dim), "seed": seed}
    kwargs.update(overrides)
    return MhConfig(**kwargs)


class _Mass:
    """Constant mass-matrix operations; fast path for the identity."""

    def __init__(self, mass: Optional[np.ndarray], dim: int):
        if mass is None:
            self.mass = None
            self.half_logdet = 0.0
        else:
            self.mass = np.asarray(mass, dtype=float)
            self.chol = np.linalg.cholesky(self.mass)
            sign, logdet = np.linalg.slogdet(self.mass)
            self.half_logdet = 0.5 * logdet
        self.dim = dim

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal(self.dim)
        return z if self.mass is None else self.chol @ z

    def apply_inv(self, p: np.ndarray) -> np.ndarray:
        return p if self.mass is None else np.linalg.solve(self.mass, p)

    def kinetic(self, p: np.ndarray) -> float:
        return 0.5 * float(p @ self.apply_inv(p))


def _project_momentum(grad: np.ndarray, mass: _Mass, p: np.ndarray) -> np.ndarray:
    """Project ``p`` onto the tangency constraint grad_g @ M^-1 @ p = 0."""
    Minv_gradT = mass.apply_inv(grad.T) if grad.ndim == 2 else None
    lhs = grad @ Minv_gradT
    rhs = grad @ mass.apply_inv(p)
    alpha = np.linalg.solve(lhs, rhs)
    return p - grad.T @ alpha


def rattle_trajectory(target: Target, theta: np.ndarray, p: np.ndarray,
                      cfg: HmcConfig, mass: Optional[_Mass] = None):
    """Integrate the constrained Hamiltonian system for ``cfg.n_leapfrog``
    steps from ``(theta, p)``.

    Each step solves the position-constraint multipliers by Newton iteration
    and re-projects the momentum onto the tangency constraint.  Returns
    ``(theta_end, p_end, frame_end, log_kernel_end)`` or None when any solve
    fails (callers reject the whole trajectory).
    """
    m = target.manifold
    if mass is None:
        mass = _Mass(cfg.mass, m.ambient_dim)
    eps = cfg.step_size

    try:
        frame = tangent_frame(m, theta)
        grad_u = -np.asarray(target.grad_log_kernel(theta, frame), dtype=float)
    except CgfdError:
        return None

    for _ in range(cfg.n_leapfrog):
        try:
            grad_cur = np.atleast_2d(np.asarray(m.grad_g(theta), dtype=float))
            p_half = p - 0.5 * eps * grad_u
            theta_hat = theta + eps * mass.apply_inv(p_half)
            # Newton in the multipliers: g(theta_hat - eps M^-1 grad_cur.T lam) = 0
            normal_step = eps * mass.apply_inv(grad_cur.T)
            lam = np.zeros(m.codim)
            theta_new = None
            for _ in range(MAX_NEWTON_ITERS):
                candidate = theta_hat - normal_step @ lam
                residual = np.atleast_1d(np.asarray(m.g(candidate), dtype=float))
                if not np.all(np.isfinite(residual)):
                    return None
                if np.linalg.norm(residual) <= TOL_PROJECT:
                    theta_new = candidate
                    break
                jac = -np.atleast_2d(np.asarray(m.grad_g(candidate), dtype=float)) @ normal_step
                try:
                    delta = np.linalg.solve(jac, residual)
                except np.linalg.LinAlgError:
                    return None
                lam = lam - delta
            if theta_new is None:
                return None
            p_half = p_half - grad_cur.T @ lam

            frame = tangent_frame(m, theta_new)
            grad_u = -np.asarray(target.grad_log_kernel(theta_new, frame), dtype=float)
            grad_new = np.atleast_2d(np.asarray(m.grad_g(theta_new), dtype=float))
            p_new = p_half - 0.5 * eps * grad_u
            p_new = _project_momentum(grad_new, mass, p_new)
        except (CgfdError, np.linalg.LinAlgError):
            return None
        theta, p = theta_new, p_new

    try:
        log_k = float(target.log_kernel(theta, frame))
    except CgfdError:
        return None
    if not np.isfinite(log_k):
        return None
    return theta, p, frame, log_k


def hmc_step(state: ChainState, target: Target, cfg: HmcConfig,
             rng: np.random.Generator) -> ChainState:
    """One constrained Hamiltonian proposal: draw a tangent momentum, integrate
    RATTLE, and Metropolis-accept on the total Hamiltonian.

    Failed trajectories count as projection failures and leave the state
    unchanged.
    """
    if target.grad_log_kernel is None:
        raise ValueError("HMC requires target.grad_log_kernel")
    m = target.manifold
    stats = state.stats
    stats.proposals += 1
    mass = _Mass(cfg.mass, m.ambient_dim)

    grad0 = np.atleast_2d(np.asarray(m.grad_g(state.theta), dtype=float))
    try:
        p0 = _project_momentum(grad0, mass, mass.draw(rng))
    except np.linalg.LinAlgError:
        stats.projection_failures += 1
        return state

    # Potential = -log kernel + 1/2 log|M|; the mass term is constant and
    # cancels in the ratio but is kept for clarity of the Hamiltonian.
    h0 = mass.kinetic(p0) - state.log_kernel + mass.half_logdet

    if cfg.n_leapfrog == 0:
        stats.accepts += 1
        return state

    result = rattle_trajectory(target, state.theta, p0, cfg, mass)
    if result is None:
        stats.projection_failures += 1
        return state
    theta1, p1, frame1, log_k1 = result
    h1 = mass.kinetic(p1) - log_k1 + mass.half_logdet

    if np.log(rng.uniform()) < h0 - h1:
        stats.accepts += 1
        return ChainState(theta=theta1, log_kernel=log_k1, frame=frame1, stats=stats)
    return state


def mh_step(state: ChainState, target: Target, cfg: MhConfig,
            rng: np.random.Generator) -> ChainState:
    """One tangent-space Metropolis-Hastings proposal with the corrected
    reverse check.

    The reverse projection must both converge and land within
    ``cfg.reverse_tol`` of the current point; a projection that merely finds
    *some* manifold point (a different solution branch) is rejected.  The
    acceptance ratio carries the tangent-Gaussian density ratio
    ``q(v') / q(v)`` because forward and reverse tangent steps generally have
    different lengths.
    """
    m = target.manifold
    stats = state.stats
    stats.proposals += 1
    x = state.theta
    frame_x = state.frame

    v = cfg.tangent_scale * rng.standard_normal(m.intrinsic_dim)
    try:
        y = project_to_manifold(m, x + frame_x.Q @ v, frame_x)
    except CgfdError:
        y = None
    if y is None:
        stats.projection_failures += 1
        return state

    try:
        frame_y = tangent_frame(m, y)
    except CgfdError:
        stats.projection_failures += 1
        return state

    v_rev = frame_y.Q.T @ (x - y)
    try:
        x_back = project_to_manifold(m, y + frame_y.Q @ v_rev, frame_y)
    except CgfdError:
        x_back = None
    if x_back is None:
        stats.reverse_check_failures += 1
        return state
    if cfg.check_reverse_point and np.linalg.norm(x_back - x) > cfg.reverse_tol:
        stats.reverse_check_failures += 1
        return state

    try:
        log_k_y = float(target.log_kernel(y, frame_y))
    except CgfdError:
        return state
    if not np.isfinite(log_k_y):
        return state

    if cfg.tangent_scale > 0:
        scale_sq = 2.0 * cfg.tangent_scale ** 2
        log_q_ratio = (float(v @ v) - float(v_rev @ v_rev)) / scale_sq
    else:
        log_q_ratio = 0.0
    log_alpha = log_k_y - state.log_kernel + log_q_ratio
    if np.log(rng.uniform()) < log_alpha:
        stats.accepts += 1
        return ChainState(theta=y, log_kernel=log_k_y, frame=frame_y, stats=stats)
    return state


@dataclass
class ChainDiagnostics:
    """Structured summary of one chain run."""

    n_steps: int
    burn_in: int
    thin: int
    n_retained: int
    acceptance_rate: float
    projection_failure_rate: float
    reverse_check_failure_rate: float
    mean_constraint_drift: float
    stats: ChainStats

    def as_dict(self) -> dict:
        return {
            "n_steps": self.n_steps,
            "burn_in": self.burn_in,
            "thin": self.thin,
            "n_retained": self.n_retained,
            "acceptance_rate": self.acceptance_rate,
            "projection_failure_rate": self.projection_failure_rate,
            "reverse_check_failure_rate": self.reverse_check_failure_rate,
            "mean_constraint_drift": self.mean_constraint_drift,
            "proposals": self.stats.proposals,
            "accepts": self.stats.accepts,
            "projection_failures": self.stats.projection_failures,
            "reverse_check_failures": self.stats.reverse_check_failures,
        }


def init_state(target: Target, init, stats: Optional[ChainStats] = None) -> ChainState:
    """Project a user guess onto the manifold and evaluate the kernel there.

    Raises InfeasibleInit when the initial Newton projection fails.
    """
    init = np.asarray(init, dtype=float)
    m = target.manifold
    try:
        frame_guess = tangent_frame(m, init)
    except CgfdError as exc:
        raise InfeasibleInit(f"cannot build a frame at the initial guess: {exc}") from exc
    theta0 = project_to_manifold(m, init, frame_guess)
    if theta0 is None:
        raise InfeasibleInit("initial Newton projection onto the manifold failed")
    frame0 = tangent_frame(m, theta0)
    try:
        log_k0 = float(target.log_kernel(theta0, frame0))
    except CgfdError as exc:
        raise InfeasibleInit(f"kernel degenerate at the projected initial point: {exc}") from exc
    return ChainState(theta=theta0, log_kernel=log_k0, frame=frame0,
                      stats=stats if stats is not None else ChainStats())


def run_chain(target: Target, init, sampler: str, cfg, n_samples: int,
              burn_in: int = 0, thin: int = 1,
              rng: Optional[np.random.Generator] = None):
    """Run one chain and return ``(samples, diagnostics)``.

    ``samples`` holds the retained post-burn-in, thinned positions as an
    ``(n_retained, d)`` array; every retained position satisfies the
    feasibility tolerance.  Deterministic for a fixed config seed.
    """
    if sampler == "hmc":
        step = hmc_step
    elif sampler == "mh":
        step = mh_step
    else:
        raise ValueError(f"unknown sampler {sampler!r}; expected 'hmc' or 'mh'")
    if burn_in > n_samples:
        raise ValueError("burn_in cannot exceed n_samples")
    if thin < 1:
        raise ValueError("thin must be >= 1")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)

    state = init_state(target, init)
    m = target.manifold
    retained = []
    drift = []
    for k in range(n_samples):
        state = step(state, target, cfg, rng)
        if k >= burn_in and (k - burn_in) % thin == 0:
            retained.append(state.theta)
            drift.append(m.constraint_norm(state.theta))

    samples = np.asarray(retained, dtype=float).reshape(len(retained), m.ambient_dim)
    stats = state.stats
    n_prop = max(stats.proposals, 1)
    diagnostics = ChainDiagnostics(
        n_steps=n_samples,
        burn_in=burn_in,
        thin=thin,
        n_retained=len(retained),
        acceptance_rate=stats.accepts / n_prop,
        projection_failure_rate=stats.projection_failures / n_prop,
        reverse_check_failure_rate=stats.reverse_check_failures / n_prop,
        mean_constraint_drift=float(np.mean(drift)) if drift else 0.0,
        stats=stats,
    )
    return samples, diagnostics
