"""Exception types shared across the package."""


class LTRAEError(Exception):
    """Base class for all package errors."""


class ValidationError(LTRAEError, ValueError):
    """Malformed input (bad weights, bad file contents, bad config)."""


class DomainError(LTRAEError, ValueError):
    """Argument outside the domain of a function."""


class DivergenceError(LTRAEError, ArithmeticError):
    """An integral or limit that is infinite for the given distribution."""


class CapabilityError(LTRAEError):
    """Request beyond what the numerics can deliver reliably."""


class EvaluationError(LTRAEError, ArithmeticError):
    """Integrand produced a non-finite value at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class ConfigurationError(LTRAEError, ValueError):
    """Incompatible simulation parameters (e.g. degree larger than k)."""
