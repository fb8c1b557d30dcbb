"""Exception and warning types raised across the package."""


class OcctimeError(Exception):
    """Base class for package errors."""


class UnsupportedKindError(OcctimeError, TypeError):
    """The requested operation is not available for this law or model kind."""


class InvalidRangeError(OcctimeError, ValueError):
    """An argument lies outside the admissible range."""


class GridTooCoarseError(OcctimeError):
    """The lattice error estimate exceeds the requested tolerance."""

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class InfiniteMomentError(OcctimeError, ValueError):
    """A required moment does not exist."""


class DegenerateVarianceError(OcctimeError, ValueError):
    """The CLT scale constant vanishes."""


class DivergentTransformError(OcctimeError, ArithmeticError):
    """A renewal-type denominator is not strictly inside the unit disc."""


class UnstableModelError(OcctimeError, ValueError):
    """The Lévy model drifts to +infinity, so psi is not defined."""


class DegenerateLevelError(OcctimeError, ValueError):
    """The level and model do not produce proper sojourn cycles."""


class NoRootError(OcctimeError, ArithmeticError):
    """The drain-rate equation has no root inside the MGF domain."""


class EmptySampleError(OcctimeError, ValueError):
    """An empirical routine received no data."""


class ConfigError(OcctimeError, ValueError):
    """A run configuration could not be parsed or validated."""


class InversionAccuracyWarning(RuntimeWarning):
    """Numerical Laplace inversion did not reach its target accuracy."""
