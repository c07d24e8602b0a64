"""Exception hierarchy shared by all modules."""


class SelfImproveError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(SelfImproveError, ValueError):
    """A constructor or config input violates a stated invariant."""


class DomainError(SelfImproveError, ValueError):
    """Evaluation requested outside a function's natural domain."""


class BracketError(SelfImproveError, RuntimeError):
    """Root finding could not bracket a sign change before domain breakdown."""
