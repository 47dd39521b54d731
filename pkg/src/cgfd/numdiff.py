"""Central finite differences with the cube-root-of-eps step rule."""

import numpy as np

# Balances truncation against round-off for second-order central differences.
DEFAULT_STEP_SCALE = float(np.cbrt(np.finfo(float).eps))


def step_size(x_i: float, scale: float = DEFAULT_STEP_SCALE) -> float:
    return scale * max(1.0, abs(x_i))


def central_jacobian(func, x, scale: float = DEFAULT_STEP_SCALE) -> np.ndarray:
    """Jacobian of a vector- or matrix-valued ``func`` at ``x``, one column stack
    per coordinate.

    Returns an array of shape ``func(x).shape + (len(x),)``.
    """
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(func(x), dtype=float)
    out = np.empty(f0.shape + (x.size,))
    for i in range(x.size):
        h = step_size(x[i], scale)
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        out[..., i] = (np.asarray(func(xp)) - np.asarray(func(xm))) / (2.0 * h)
    return out


def central_gradient(func, x, scale: float = DEFAULT_STEP_SCALE) -> np.ndarray:
    """Gradient of a scalar-valued ``func`` at ``x``."""
    x = np.asarray(x, dtype=float)
    grad = np.empty(x.size)
    for i in range(x.size):
        h = step_size(x[i], scale)
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        grad[i] = (func(xp) - func(xm)) / (2.0 * h)
    return grad
