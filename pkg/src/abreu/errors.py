"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to, so the front end can
translate failures without a lookup table.
"""


class AbreuError(Exception):
    exit_code = 1


class InputError(AbreuError, ValueError):
    """Malformed or inadmissible input data (exit code 2)."""

    exit_code = 2

    def __init__(self, message, invariant=None):
        super().__init__(message)
        self.invariant = invariant


class DomainError(AbreuError, ValueError):
    """A point lies outside the closed polygon."""

    exit_code = 2


class SingularPointError(DomainError):
    """Evaluation requested on or beyond the boundary, where jets blow up."""


class ConvexityError(AbreuError, ArithmeticError):
    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ConsistencyError(AbreuError, ValueError):
    """Boundary data do not close up (A inconsistent with sigma)."""

    exit_code = 2


class DivergedError(AbreuError, RuntimeError):
    exit_code = 3

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class BarrierError(DivergedError):
    """Line search could not keep the Hessian positive definite."""


class GeometryError(AbreuError, RuntimeError):
    pass


class NonCompactSectionError(AbreuError, ValueError):
    """Section reaches the boundary of the domain; shrink the level."""

    exit_code = 2


class ConditioningError(AbreuError, ArithmeticError):
    pass
