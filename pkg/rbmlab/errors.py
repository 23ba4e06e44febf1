"""
Exceptions and warnings shared by the numerical modules.

Management commands map these onto exit codes: ConfigError -> 2,
NumericalError (and its subclasses) -> 3.
"""


class RbmLabError(Exception):
    """Base class for every error raised by rbmlab."""
    pass


class InvalidArgumentError(RbmLabError, ValueError):
    """An argument violates an operation's precondition."""
    pass


class DomainError(RbmLabError, ValueError):
    """An input lies outside the mathematical domain of a function."""
    pass


class SingularPointError(DomainError):
    """A function was evaluated at one of its singular points."""
    pass


class NumericalError(RbmLabError, ArithmeticError):
    """A numerical procedure failed (non-convergence, solver failure)."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class InsufficientDataError(NumericalError):
    """Too few usable samples were left to form an estimate."""
    pass


class ConfigError(RbmLabError):
    """Experiment configuration failed validation."""

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors or {}


class AccuracyWarning(UserWarning):
    """A result was produced but may not meet its accuracy target."""
    pass
