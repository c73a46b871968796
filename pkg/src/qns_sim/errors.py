"""Exception hierarchy shared across the package."""


class QnsError(Exception):
    """Base class for all package-specific errors."""


class DomainError(QnsError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NonFiniteField(QnsError):
    """A field contains NaN or Inf samples."""


class GridMismatch(QnsError):
    """Two fields that must share a grid do not."""


class DensityNonPositive(QnsError):
    """Density dropped to or below the positivity floor; runs abort, never clip.

    Carries the last valid state (if available) for post-mortem inspection.
    """

    def __init__(self, message, state=None, time=None):
        super().__init__(message)
        self.state = state
        self.time = time


class StepTooSmall(QnsError):
    """The stable time step collapsed below the configured fraction of t_end."""


class InsufficientSnapshots(QnsError):
    """A trajectory-based check needs more stored time levels than it got."""


class ParseError(QnsError):
    """Malformed configuration text.  Carries the offending 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(QnsError):
    """A configuration parsed cleanly but violates an admissibility hypothesis."""
