class InvalidParameter(ValueError):
    """Raised when an argument lies outside an operation's domain."""


class InvariantViolation(RuntimeError):
    """Raised when a simulation invariant fails; always a defect, never data."""
