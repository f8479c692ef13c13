"""Exception types shared across the package."""


class BarygapError(Exception):
    """Base class for all package errors."""


class InputError(BarygapError):
    """Invalid argument: bad vertex index, violated precondition, malformed file."""


class ResourceCapError(BarygapError):
    """An enumeration or LP would exceed the configured desk-scale cap."""

    def __init__(self, message, required=None, cap=None):
        super().__init__(message)
        self.required = required
        self.cap = cap


class SolverError(BarygapError):
    """Iterative solver failed to certify the requested tolerance.

    Carries the best two-sided bounds found so the caller can decide
    whether they are still usable.
    """

    def __init__(self, message, lower=None, upper=None):
        super().__init__(message)
        self.lower = lower
        self.upper = upper
