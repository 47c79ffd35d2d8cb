"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when arguments violate an operation's preconditions."""


class NumericalFailureError(ArithmeticError):
    """Raised when a numerical method cannot produce a valid result."""
