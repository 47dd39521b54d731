"""Deterministic midpoint-rule integration on single-chart manifolds.

Used for normalizing constants, region probabilities, and grid densities
that serve as ground truth against the MCMC samplers.  Only manifolds with a
global chart (circle and sphere minus poles) are supported; midpoint nodes
keep a half-cell inset from the domain boundary, which excludes the poles
automatically.
"""

import csv
from dataclasses import dataclass
from itertools import product
from typing import Callable

import numpy as np

from .errors import NonFinite
from .kernels import Chart


@dataclass(frozen=True)
class GridDensity:
    """Normalized cell masses of a kernel over a chart's tensor grid.

    ``mass`` sums to one; ``theta`` holds the ambient coordinates of each
    cell's midpoint node.  ``unnormalized_total`` is the plain midpoint
    estimate of the kernel's integral (surface area for a constant kernel at
    log value zero).
    """

    chart: Chart
    axes: tuple
    u: np.ndarray             # (n_cells, intrinsic_dim)
    theta: np.ndarray         # (n_cells, ambient_dim)
    mass: np.ndarray          # (n_cells,)
    cell_volume: float
    unnormalized_total: float
    measure: str

    def n_cells(self) -> int:
        return self.mass.size


def circle_chart() -> Chart:
    """Angle chart of the unit circle, alpha in (-pi, pi)."""

    def psi_inverse(u):
        return np.array([np.cos(u[0]), np.sin(u[0])])

    def psi_inverse_gradient(u):
        return np.array([[-np.sin(u[0])], [np.cos(u[0])]])

    return Chart(
        intrinsic_dim=1,
        psi_inverse=psi_inverse,
        psi_inverse_gradient=psi_inverse_gradient,
        domain=(np.array([-np.pi]), np.array([np.pi])),
    )


def sphere_polar_chart() -> Chart:
    """Polar chart of the unit sphere minus the poles:
    (azimuth, inclination) in (0, 2 pi) x (0, pi)."""

    def psi_inverse(u):
        az, inc = u
        return np.array([np.cos(az) * np.sin(inc), np.sin(az) * np.sin(inc), np.cos(inc)])

    def psi_inverse_gradient(u):
        az, inc = u
        return np.array([
            [-np.sin(az) * np.sin(inc), np.cos(az) * np.cos(inc)],
            [np.cos(az) * np.sin(inc), np.sin(az) * np.cos(inc)],
            [0.0, -np.sin(inc)],
        ])

    return Chart(
        intrinsic_dim=2,
        psi_inverse=psi_inverse,
        psi_inverse_gradient=psi_inverse_gradient,
        domain=(np.array([0.0, 0.0]), np.array([2.0 * np.pi, np.pi])),
    )


def normalize_on_chart(log_kernel: Callable[[np.ndarray], float], chart: Chart,
                       resolution, measure: str = "surface") -> GridDensity:
    """Midpoint-rule grid density of a log kernel over the chart domain.

    ``measure="surface"`` treats the kernel as a density with respect to the
    manifold's surface measure and multiplies in the chart's area element;
    ``measure="chart"`` treats it as a density in the chart coordinates
    themselves (e.g. the reparameterized fiducial kernel).  Raises NonFinite
    if any kernel value on the grid is NaN or +inf (-inf cells get mass 0).
    """
    if measure not in ("surface", "chart"):
        raise ValueError("measure must be 'surface' or 'chart'")
    lower, upper = (np.asarray(b, dtype=float) for b in chart.domain)
    k = chart.intrinsic_dim
    if np.isscalar(resolution):
        resolution = (int(resolution),) * k
    if len(resolution) != k:
        raise ValueError(f"resolution must have {k} entries")
    axes = []
    widths = []
    for i in range(k):
        n_i = int(resolution[i])
        if n_i < 1:
            raise ValueError("resolution entries must be positive")
        width = (upper[i] - lower[i]) / n_i
        axes.append(lower[i] + width * (np.arange(n_i) + 0.5))
        widths.append(width)
    cell_volume = float(np.prod(widths))

    u_nodes = np.array(list(product(*axes)))
    n_cells = u_nodes.shape[0]
    log_vals = np.empty(n_cells)
    area = np.ones(n_cells)
    theta = None
    for idx in range(n_cells):
        u = u_nodes[idx]
        point = np.asarray(chart.psi_inverse(u), dtype=float)
        if theta is None:
            theta = np.empty((n_cells, point.size))
        theta[idx] = point
        log_vals[idx] = log_kernel(point) if measure == "surface" else log_kernel(u)
        if measure == "surface":
            area[idx] = chart.area_element(u)

    if np.any(np.isnan(log_vals)) or np.any(log_vals == np.inf):
        raise NonFinite("kernel evaluated to NaN or +inf on the grid")

    peak = np.max(log_vals)
    weights = np.exp(log_vals - peak) * area * cell_volume
    total = float(np.sum(weights))
    if not (total > 0.0 and np.isfinite(total)):
        raise NonFinite("grid mass is zero or non-finite")
    mass = weights / total
    unnormalized_total = float(np.exp(peak) * total)
    return GridDensity(
        chart=chart,
        axes=tuple(np.asarray(ax) for ax in axes),
        u=u_nodes,
        theta=theta,
        mass=mass,
        cell_volume=cell_volume,
        unnormalized_total=unnormalized_total,
        measure=measure,
    )


def region_mass(density: GridDensity, region: Callable[[np.ndarray], bool]) -> float:
    """Probability of the region: sum of cell masses whose node satisfies the
    predicate."""
    keep = np.fromiter((bool(region(t)) for t in density.theta),
                       dtype=bool, count=density.n_cells())
    return float(np.sum(density.mass[keep]))


def cumulative_masses(density: GridDensity):
    """(cell upper edges, CDF values) for a one-dimensional chart."""
    if density.chart.intrinsic_dim != 1:
        raise ValueError("cumulative masses need a one-dimensional chart")
    centers = density.axes[0]
    edges = centers + 0.5 * density.cell_volume
    return edges, np.cumsum(density.mass)


def grid_to_csv(density: GridDensity, path, header_comment: str = "") -> None:
    """Write (u, theta, mass) rows; a '#'-prefixed header line comes first
    when ``header_comment`` is nonempty."""
    k = density.u.shape[1]
    d = density.theta.shape[1]
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow([f"u{i + 1}" for i in range(k)]
                        + [f"theta{i + 1}" for i in range(d)] + ["mass"])
        for row_u, row_t, mass in zip(density.u, density.theta, density.mass):
            writer.writerow([repr(float(v)) for v in row_u]
                            + [repr(float(v)) for v in row_t]
                            + [repr(float(mass))])
