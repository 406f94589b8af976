"""Exception hierarchy shared by all modules."""


class ExvibError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ExvibError, ValueError):
    """One or more parameter invariants are violated.

    ``violations`` holds ``(field, message)`` pairs, one per failed check.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        text = "; ".join(f"{field}: {msg}" for field, msg in self.violations)
        super().__init__(text)

    @property
    def fields(self):
        return [field for field, _ in self.violations]


class DomainError(ExvibError, ValueError):
    """An input lies outside the domain of a formula."""


class ModelError(ExvibError, ValueError):
    """An on-site slope model cannot produce a coupling."""


class DegenerateInputError(ExvibError, ValueError):
    """Inputs are formally valid but leave nothing to compute."""


class UnsupportedBoundaryError(ExvibError, ValueError):
    """A momentum-space construction was requested on an open chain."""


class ShapeError(ExvibError, ValueError):
    """Matrix dimensions do not match."""


class ResourceError(ExvibError):
    """A basis or matrix would exceed the configured size cap."""

    def __init__(self, message, size=None):
        self.size = size
        super().__init__(message)


class NumericalError(ExvibError, ArithmeticError):
    """An iterative routine failed to converge or lost accuracy."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)
