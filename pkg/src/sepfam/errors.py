"""Exception hierarchy shared across the package."""


class SepfamError(Exception):
    """Base class for all package-specific errors."""


class DomainError(SepfamError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateDataError(SepfamError, ValueError):
    """Data with zero spread; downstream statistics would divide by zero."""


class NoRootError(SepfamError, ArithmeticError):
    """A scalar root solve found no root inside its bracket."""


class ConvergenceError(SepfamError, RuntimeError):
    """An iterative procedure failed to converge.

    Carries the best point found so far in ``best`` when available.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ChainDiagnosticError(ConvergenceError):
    """A Markov chain degenerated (for example near-zero acceptance)."""


class InputError(SepfamError, ValueError):
    """Unreadable, unparsable, or invalid user-supplied input."""
