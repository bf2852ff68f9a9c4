"""Exception types raised across the package."""


class JelkError(Exception):
    """Base class for all package errors."""


class DomainError(JelkError, ValueError):
    """An argument lies outside the domain of a function."""


class ValidationError(JelkError, ValueError):
    """Input data fails a structural check (sizes, dimensions, labels)."""


class InfeasibleThetaError(DomainError):
    """The candidate mean lies outside the open range of the pseudo-values."""


class DegenerateDataError(JelkError, ValueError):
    """The empirical likelihood feasibility interval is empty."""


class FeasibilityError(JelkError, ArithmeticError):
    """A probability weight is non-positive at a supposed solution."""


class ConvergenceError(JelkError, RuntimeError):
    """An iterative solver stopped before meeting its tolerance.

    Attributes:
        bracket: last bracket ``(lo, hi)`` held by the solver, if any.
        diagnostics: free-form mapping with solver state at failure.
    """

    def __init__(self, message, bracket=None, diagnostics=None):
        super().__init__(message)
        self.bracket = bracket
        self.diagnostics = dict(diagnostics or {})
