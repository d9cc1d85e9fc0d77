"""Exception hierarchy.

Precondition problems derive from :class:`DomainError` (a ``ValueError``);
numerical breakdowns derive from :class:`NumericalError`.  The CLI maps the
first family to exit code 2 and the second to exit code 3.
"""


class DomainError(ValueError):
    """Input outside the admissible parameter range."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure."""


class IntegrationError(NumericalError):
    """The ODE integrator stopped before reaching the requested end point."""

    def __init__(self, message, t_reached=None):
        super().__init__(message)
        self.t_reached = t_reached


class NoMthZeroError(NumericalError):
    """The shooting trajectory produced fewer than ``m`` sign changes."""

    def __init__(self, message, zeros_found=0, t_reached=None):
        super().__init__(message)
        self.zeros_found = zeros_found
        self.t_reached = t_reached


class StructureError(NumericalError):
    """Computed nodal structure contradicts the expected zone layout."""


class ConvergenceError(NumericalError):
    """An iterative solver did not converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BracketError(NumericalError):
    """A root could not be bracketed."""


class PrecisionLossError(NumericalError):
    """Evaluation requested outside the validated accuracy range."""
