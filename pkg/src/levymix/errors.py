"""Exception hierarchy shared across the package."""


class LevymixError(Exception):
    """Base class for all package errors."""


class NonFiniteInput(LevymixError):
    """Input matrix or vector contains NaN or Inf entries."""


class ConvergenceFailure(LevymixError):
    """An iterative computation failed to converge."""


class IllConditioned(LevymixError):
    """Eigenvalue gaps or conditioning make the Jordan structure unreliable."""


class DimensionMismatch(LevymixError):
    """Vector or matrix dimensions are incompatible."""


class InvalidGenerator(LevymixError):
    """A generator matrix does not have |det| = 1 within tolerance."""


class GroupTooLarge(LevymixError):
    """Finite-group enumeration exceeded the element cap."""


class NotCompact(LevymixError):
    """Powers of the matrix diverge; no invariant inner product exists."""


class NotSPD(LevymixError):
    """Matrix is not symmetric positive definite."""


class CompactClosure(LevymixError):
    """Matrix has compact cyclic closure; no shrinking family exists."""


class NotReached(LevymixError):
    """Absorption lag exceeds the supplied power bound."""


class OverlapUnknown(LevymixError):
    """Exact volume requested for a region not flagged as disjoint."""


class SingularMatrix(LevymixError):
    """Matrix is singular or numerically non-invertible."""


class NotAxisAligned(LevymixError):
    """Exact intersection requested for regions with non-diagonal frames."""


class UnboundedRegion(LevymixError):
    """Region family does not admit a finite bounding box."""


class UnsupportedKind(LevymixError):
    """Operation not defined for this noise kind."""


class NonGaussian(LevymixError):
    """Gaussian-only operation invoked on a non-Gaussian noise spec."""


class ApproximationTooCoarse(LevymixError):
    """Grid approximation of a set misses the requested measure accuracy."""


class ConfigError(LevymixError):
    """Experiment configuration file is malformed."""
