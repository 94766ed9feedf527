"""Exception hierarchy shared across the package."""


class VolpathError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(VolpathError):
    """Invalid configuration, parameters, or spec wiring."""


class NumericalFailureError(VolpathError):
    """Non-finite values encountered during model stepping."""

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


class DegenerateBaselineError(VolpathError):
    """A z-score test was asked to normalize by a zero standard deviation."""


class DataError(VolpathError):
    """Non-finite or malformed data fed into an accumulator."""
