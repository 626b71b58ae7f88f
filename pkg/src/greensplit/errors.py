"""Exception types raised across the package."""


class GreensplitError(Exception):
    """Base class for all package errors."""


class ConfigError(GreensplitError):
    """Malformed configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class ValidationError(GreensplitError):
    """A model failed a geometric validation check.

    ``location`` is the radius of the worst violation when one exists.
    """

    def __init__(self, message, location=None):
        if location is not None:
            message = f"{message} (worst at r={location:.6g})"
        super().__init__(message)
        self.location = location


class DomainError(GreensplitError):
    """A point, ball or scale lies outside the region the computation covers."""


class ConvergenceError(GreensplitError):
    """An iterative solve did not converge."""


class DegenerateConfigurationError(GreensplitError):
    """Pole configuration too close to dependent."""
