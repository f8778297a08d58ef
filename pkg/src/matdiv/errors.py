"""Exception types shared across the library."""


class MatdivError(Exception):
    """Base class for all library errors."""


class DomainError(MatdivError, ValueError):
    """An argument violates a documented precondition."""


class SizingError(MatdivError, ValueError):
    """A requested object would exceed the addressable size budget."""


class NumericError(MatdivError, RuntimeError):
    """A numerical routine failed to converge or produced non-finite values."""


class DivergenceError(NumericError):
    """Training loss became non-finite at a known SGD step."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"training diverged at step {step}")


class ConfigError(MatdivError, ValueError):
    """An experiment configuration document is malformed."""
