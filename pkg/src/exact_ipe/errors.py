"""Exception hierarchy shared by every module."""


class ExactIPEError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ExactIPEError, ValueError):
    """Non-finite or malformed input."""


class InvalidCovarianceError(InvalidInputError):
    """Covariance that is not symmetric positive semi-definite."""


class DomainError(ExactIPEError, ValueError):
    """Input is well formed but outside the domain of the operation."""


class OrientationError(DomainError):
    """Surface normals point inward or the surface self-intersects."""


class UnsupportedRegionError(DomainError):
    """Region shape the routine cannot handle (e.g. non-convex)."""


class ConsistencyError(ExactIPEError, RuntimeError):
    """An encoding left its mathematically guaranteed range."""


class FormatError(InvalidInputError):
    """Text record that cannot be parsed."""
