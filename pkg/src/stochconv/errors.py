"""Exception types shared across the library."""


class StochConvError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(StochConvError):
    """Raised when operator/vector/ensemble dimensions are incompatible."""

    def __init__(self, message, expected=None, got=None):
        if expected is not None or got is not None:
            message = f"{message} (expected {expected}, got {got})"
        super().__init__(message)
        self.expected = expected
        self.got = got


class PredictabilityError(StochConvError):
    """Raised when an adapted integrand callback peeks at future increments."""


class ConfigError(StochConvError):
    """Raised when a scenario config fails schema validation."""
