"""Exception types shared across the package."""


class CgfdError(Exception):
    """Base class for all package-specific errors."""


class RankDeficient(CgfdError):
    """Constraint gradient does not have full row rank (redundant constraints)."""


class OffManifold(CgfdError):
    """Point violates the feasibility tolerance ||g(theta)|| <= tol_on."""


class DegenerateJacobian(CgfdError):
    """The (pseudo)determinant scale of the DGA gradient is zero or negative."""


class PseudoinverseFailure(CgfdError):
    """Symmetric eigensolve cannot separate the nonzero spectrum from the null spectrum."""


class OutOfDomain(CgfdError):
    """Chart coordinates fall outside the chart's domain box."""


class NonFinite(CgfdError):
    """A kernel evaluation produced a non-finite value where finiteness is required."""


class InfeasibleInit(CgfdError):
    """Initial point could not be projected onto the constraint manifold."""


class EmptyData(CgfdError, ValueError):
    """Model constructor received no observations."""


class DataOutOfRange(CgfdError, ValueError):
    """Observations fall outside the model's support."""


class KnotsInvalid(CgfdError, ValueError):
    """Knot vector is not strictly increasing or does not cover the support."""


class CayleySingular(CgfdError):
    """(I + A) is numerically singular; the Cayley transform is undefined."""


class CovarianceNotSPD(CgfdError):
    """Implied covariance matrix is not symmetric positive-definite."""


class BadShape(CgfdError, ValueError):
    """Input array has the wrong shape for the model."""


class EmptySamples(CgfdError, ValueError):
    """An operation that needs retained samples received none."""
