"""Linear logspline density on (0, 1) with a unit-integral constraint.

The log density is a linear combination of degree-one B-splines (hats) on a
fixed knot grid; feasibility means ``log(integral of exp(sum theta_j B_j))``
equals zero.  For linear splines the log density is piecewise linear, so the
normalizer, its gradient, the data-generating-map gradient, the CDF, and the
quantile function all reduce to closed-form per-segment integrals of
``(alpha + beta y) exp(a + b y)``.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataOutOfRange, EmptyData, KnotsInvalid
from ..geometry import ImplicitManifold
from ..kernels import FiducialModel


def default_knots() -> np.ndarray:
    """Nine knots, spacing 0.15, one below zero and one above one."""
    return -0.15 + 0.15 * np.arange(9)


def _phi0(u: np.ndarray) -> np.ndarray:
    """(exp(u) - 1) / u, stable near zero."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-4
    safe = np.where(small, 1.0, u)
    out = np.expm1(safe) / safe
    series = 1.0 + u / 2.0 + u ** 2 / 6.0 + u ** 3 / 24.0
    return np.where(small, series, out)


def _phi1(u: np.ndarray) -> np.ndarray:
    """(exp(u)(u - 1) + 1) / u^2, stable near zero."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-4
    safe = np.where(small, 1.0, u)
    out = (np.exp(safe) * (safe - 1.0) + 1.0) / safe ** 2
    series = 0.5 + u / 3.0 + u ** 2 / 8.0 + u ** 3 / 30.0
    return np.where(small, series, out)


@dataclass(frozen=True)
class LinearLogspline:
    """Hat-basis machinery on a fixed knot grid.

    All integral methods work with exponents shifted by the maximum of the
    piecewise-linear log density over [0, 1], so ratios stay finite far from
    the feasible set.
    """

    knots: np.ndarray
    dim: int = field(init=False)
    # Integration segments: knot intervals clipped to [0, 1].
    _seg_knot: np.ndarray = field(init=False)   # original knot-interval index
    _seg_lo: np.ndarray = field(init=False)
    _seg_hi: np.ndarray = field(init=False)

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        if knots.ndim != 1 or knots.size < 4:
            raise KnotsInvalid("need at least four knots")
        if not np.all(np.diff(knots) > 0):
            raise KnotsInvalid("knots must be strictly increasing")
        if knots[0] >= 0.0 or knots[-1] <= 1.0:
            raise KnotsInvalid("knot range must strictly cover [0, 1]")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "dim", knots.size - 2)
        keep = np.flatnonzero((knots[1:] > 0.0) & (knots[:-1] < 1.0))
        object.__setattr__(self, "_seg_knot", keep)
        object.__setattr__(self, "_seg_lo", np.maximum(knots[keep], 0.0))
        object.__setattr__(self, "_seg_hi", np.minimum(knots[keep + 1], 1.0))

    # -- basis -----------------------------------------------------------

    def _locate(self, y: np.ndarray) -> np.ndarray:
        """Knot-interval index of each point."""
        idx = np.searchsorted(self.knots, y, side="right") - 1
        return np.clip(idx, 0, self.knots.size - 2)

    def basis(self, y) -> np.ndarray:
        """Hat-function values, shape (len(y), dim); two nonzero per row."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        k = self._locate(y)
        h = self.knots[k + 1] - self.knots[k]
        rising = (y - self.knots[k]) / h
        rows = np.arange(y.size)
        out = np.zeros((y.size, self.dim))
        mask = (k >= 0) & (k < self.dim)
        out[rows[mask], k[mask]] = rising[mask]
        j_fall = k - 1
        mask = (j_fall >= 0) & (j_fall < self.dim)
        out[rows[mask], j_fall[mask]] = 1.0 - rising[mask]
        return out

    def log_density(self, y, theta) -> np.ndarray:
        """Unnormalized log density sum(theta_j B_j(y))."""
        return self.basis(y) @ np.asarray(theta, dtype=float)

    def _segment_lines(self, theta: np.ndarray):
        """Line coefficients (a, b) of the log density on each integration
        segment, plus the shift c = max of the log density over [0, 1]."""
        knots = self.knots
        k = self._seg_knot
        h = knots[k + 1] - knots[k]
        a = np.zeros(k.size)
        b = np.zeros(k.size)
        j_fall = k - 1
        fall_ok = (j_fall >= 0) & (j_fall < self.dim)
        th_fall = np.where(fall_ok, theta[np.clip(j_fall, 0, self.dim - 1)], 0.0)
        a += th_fall * knots[k + 1] / h
        b += -th_fall / h
        rise_ok = k < self.dim
        th_rise = np.where(rise_ok, theta[np.clip(k, 0, self.dim - 1)], 0.0)
        a += -th_rise * knots[k] / h
        b += th_rise / h
        c = float(np.max(np.maximum(a + b * self._seg_lo, a + b * self._seg_hi)))
        return a, b, c

    def _segment_masses(self, theta: np.ndarray):
        """Shifted per-segment masses I_k = integral of exp(s - c)."""
        a, b, c = self._segment_lines(theta)
        lo = self._seg_lo
        delta = self._seg_hi - lo
        base = np.exp(a + b * lo - c)
        u = b * delta
        masses = delta * base * _phi0(u)
        return a, b, c, lo, delta, base, u, masses

    # -- constraint ------------------------------------------------------

    def log_normalizer(self, theta) -> float:
        """log integral over (0, 1) of exp(sum theta_j B_j)."""
        theta = np.asarray(theta, dtype=float)
        _, _, c, _, _, _, _, masses = self._segment_masses(theta)
        return c + float(np.log(np.sum(masses)))

    def _basis_segment_integrals(self, theta: np.ndarray):
        """Shifted integrals of B_j exp(s - c) per segment, scattered into a
        (n_seg, dim) table, together with the segment mass data."""
        a, b, c, lo, delta, base, u, masses = self._segment_masses(theta)
        knots = self.knots
        k = self._seg_knot
        h = knots[k + 1] - knots[k]
        phi0 = _phi0(u)
        phi1 = _phi1(u)

        def line_integral(alpha, beta):
            return delta * base * ((alpha + beta * lo) * phi0 + beta * delta * phi1)

        table = np.zeros((k.size, self.dim))
        j_fall = k - 1
        fall_ok = (j_fall >= 0) & (j_fall < self.dim)
        vals = line_integral(knots[k + 1] / h, -1.0 / h)
        table[fall_ok, j_fall[fall_ok]] = vals[fall_ok]
        rise_ok = k < self.dim
        vals = line_integral(-knots[k] / h, 1.0 / h)
        table[rise_ok, k[rise_ok]] += vals[rise_ok]
        return table, masses, (a, b, c, lo, delta, base, u)

    def expected_basis(self, theta) -> np.ndarray:
        """E[B_j] under the normalized density; the constraint gradient."""
        theta = np.asarray(theta, dtype=float)
        table, masses, _ = self._basis_segment_integrals(theta)
        return table.sum(axis=0) / float(np.sum(masses))

    # -- distribution functions -------------------------------------------

    def cdf(self, y, theta) -> np.ndarray:
        """Integral of exp(s) from 0 to y (a true CDF on the feasible set)."""
        theta = np.asarray(theta, dtype=float)
        y = np.atleast_1d(np.asarray(y, dtype=float))
        a, b, c, lo, delta, base, u, masses = self._segment_masses(theta)
        cum = np.concatenate([[0.0], np.cumsum(masses)])
        seg = np.clip(np.searchsorted(self._seg_lo, y, side="right") - 1, 0, lo.size - 1)
        part = y - lo[seg]
        np.clip(part, 0.0, delta[seg], out=part)
        partial = part * base[seg] * _phi0(b[seg] * part)
        return np.exp(c) * (cum[seg] + partial)

    def quantile(self, q, theta) -> np.ndarray:
        """Inverse of cdf/Z: per-segment closed-form inversion of the
        monotone piecewise exp-linear CDF."""
        theta = np.asarray(theta, dtype=float)
        q = np.atleast_1d(np.asarray(q, dtype=float))
        if np.any((q <= 0.0) | (q >= 1.0)):
            raise ValueError("quantile levels must lie strictly in (0, 1)")
        a, b, c, lo, delta, base, u, masses = self._segment_masses(theta)
        cum = np.concatenate([[0.0], np.cumsum(masses)])
        target = q * cum[-1]
        seg = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, lo.size - 1)
        rem = target - cum[seg]
        bs = b[seg]
        ratio = rem / base[seg]
        small = np.abs(bs) < 1e-12
        safe_b = np.where(small, 1.0, bs)
        inside = np.where(small, ratio, np.log1p(safe_b * ratio) / safe_b)
        y = lo[seg] + inside
        return np.clip(y, lo[seg], lo[seg] + delta[seg])

    def density(self, y, theta) -> np.ndarray:
        """exp(sum theta_j B_j(y)); the model PDF when theta is feasible."""
        return np.exp(self.log_density(y, theta))


def simulate_triangular(n: int, rng: np.random.Generator,
                        left: float = 0.0, mode: float = 0.2, right: float = 1.0) -> np.ndarray:
    return rng.triangular(left, mode, right, size=n)


def triangular_pdf(y, left: float = 0.0, mode: float = 0.2, right: float = 1.0) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    up = 2.0 * (y - left) / ((right - left) * (mode - left))
    down = 2.0 * (right - y) / ((right - left) * (right - mode))
    out = np.where(y < mode, up, down)
    return np.where((y < left) | (y > right), 0.0, out)


def logspline_model(data, knots=None):
    """Build the constrained logspline model.

    Returns ``(model, manifold, spline)``; the spline object carries the
    basis and distribution functions used by studies (PDF at knots, data
    simulation via quantile inversion).
    """
    spline = LinearLogspline(default_knots() if knots is None else np.asarray(knots, dtype=float))
    data = np.atleast_1d(np.asarray(data, dtype=float))
    if data.size == 0:
        raise EmptyData("logspline model needs at least one observation")
    if np.any((data <= 0.0) | (data >= 1.0)):
        raise DataOutOfRange("observations must lie strictly in (0, 1)")

    dim = spline.dim
    basis_data = spline.basis(data)          # (n, dim)
    basis_sum = basis_data.sum(axis=0)

    # Per-point segment bookkeeping for the DGA gradient's partial integrals.
    seg_of_point = np.clip(
        np.searchsorted(spline._seg_lo, data, side="right") - 1, 0, spline._seg_lo.size - 1
    )

    def log_likelihood(theta):
        return float(basis_sum @ np.asarray(theta, dtype=float))

    def log_likelihood_gradient(theta):
        return basis_sum.copy()

    def dga_gradient(theta):
        theta = np.asarray(theta, dtype=float)
        table, masses, (a, b, c, lo, delta, base, u) = spline._basis_segment_integrals(theta)
        prefix = np.vstack([np.zeros(dim), np.cumsum(table, axis=0)])  # (n_seg + 1, dim)

        part = data - lo[seg_of_point]
        np.clip(part, 0.0, delta[seg_of_point], out=part)
        bs = b[seg_of_point]
        base_s = base[seg_of_point]
        us = bs * part
        phi0 = _phi0(us)
        phi1 = _phi1(us)
        knots = spline.knots
        k = spline._seg_knot[seg_of_point]
        h = knots[k + 1] - knots[k]
        lo_s = lo[seg_of_point]

        partial = prefix[seg_of_point].copy()   # (n, dim)
        rows = np.arange(data.size)
        j_fall = k - 1
        alpha = knots[k + 1] / h
        beta = -1.0 / h
        vals = part * base_s * ((alpha + beta * lo_s) * phi0 + beta * part * phi1)
        mask = (j_fall >= 0) & (j_fall < dim)
        partial[rows[mask], j_fall[mask]] += vals[mask]
        alpha = -knots[k] / h
        beta = 1.0 / h
        vals = part * base_s * ((alpha + beta * lo_s) * phi0 + beta * part * phi1)
        mask = k < dim
        partial[rows[mask], k[mask]] += vals[mask]

        log_f_shifted = basis_data @ theta - c
        return -partial / np.exp(log_f_shifted)[:, None]

    def g(theta):
        return np.array([spline.log_normalizer(theta)])

    def grad_g(theta):
        return spline.expected_basis(theta).reshape(1, -1)

    model = FiducialModel(
        data=data,
        log_likelihood=log_likelihood,
        dga_gradient=dga_gradient,
        log_likelihood_gradient=log_likelihood_gradient,
    )
    manifold = ImplicitManifold(ambient_dim=dim, codim=1, g=g, grad_g=grad_g)
    return model, manifold, spline
