"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Raised for ambient dimensions other than 2 and 3."""


class QuadratureDegreeError(ValueError):
    """Raised when a quadrature rule is too coarse for the requested order."""


class InvalidRotationError(ValueError):
    """Raised when a matrix is not orthogonal with determinant +1."""


class SingularMatrixError(ValueError):
    """Raised when an operation requires an invertible matrix."""


class BodyError(ValueError):
    """Raised for invalid body data (bad radius, non-sublinear support, ...)."""


class GeneratorOrderError(ValueError):
    """Raised when a generator has no usable coefficient at a required order."""

    def __init__(self, message, failed_orders=()):
        super().__init__(message)
        self.failed_orders = tuple(failed_orders)


class SynthesisError(ValueError):
    """Raised when a target carries a harmonic order the generator profile lacks."""


class ResidualToleranceError(RuntimeError):
    """Raised when a decomposition residual exceeds the caller's bound.

    Carries the finished result so callers can inspect diagnostics.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class PreconditionError(ValueError):
    """Raised when an operation's mathematical precondition fails."""


class BodySpecError(ValueError):
    """Raised for malformed body specification documents."""
