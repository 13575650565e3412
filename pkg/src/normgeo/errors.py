"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent input (bad exponent, dimension mismatch, ...)."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation (e.g. x = 0)."""


class NumericalError(ArithmeticError):
    """An iterative approximation did not settle; ``trace`` holds the iterates."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])
