"""Exception types shared across the package."""


class RejectLabError(Exception):
    """Base class for all package errors."""


class ValidationError(RejectLabError, ValueError):
    """An input violates a documented precondition or invariant."""


class BudgetExceededError(RejectLabError, RuntimeError):
    """An exhaustive computation is too large for exact evaluation."""


class NoiseDetectedError(ValidationError):
    """A sample assigns conflicting labels to the same domain point."""
