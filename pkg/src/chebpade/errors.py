"""Exception hierarchy.

Each family maps to a CLI exit code (see ``cli.EXIT_CODES``).
"""


class ChebPadeError(Exception):
    """Base class for all package errors."""


class GeometryError(ChebPadeError):
    """Invalid anchor configuration (coincident or collinear points)."""


class SolverError(ChebPadeError):
    """A nonlinear solve did not converge; carries the final residuals."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class ConstraintError(SolverError):
    """A converged solution violates an admissibility constraint."""


class DivergenceError(SolverError):
    """An iteration (AGM, Newton) failed to converge."""


class InversionError(SolverError):
    """Jacobi inversion failed from every seed."""


class PrecisionError(ChebPadeError):
    """The precision schedule was exhausted."""


class PoleError(ChebPadeError):
    """Evaluation at or too near a pole; ``distance`` is the offending gap when known."""

    def __init__(self, message, distance=None):
        super().__init__(message)
        self.distance = distance


class DegenerateModuliError(ChebPadeError):
    """Elliptic moduli with vanishing quasi-period."""


class QuasiPeriodError(ChebPadeError):
    """Theta function requested with Im(tau) <= 0."""


class BranchPointError(ChebPadeError):
    """Evaluation requested at a branch point where it is undefined."""


class AmbiguousTraceError(ChebPadeError):
    """A point on (or numerically on) the cut was given without a side."""


class PathError(ChebPadeError):
    """No admissible integration path could be constructed."""


class IntegrationError(ChebPadeError):
    """Quadrature failed to reach the requested tolerance."""


class TracingError(SolverError):
    """A trajectory did not reach the center within the step budget."""


class ConsistencyError(ChebPadeError):
    """Two independent evaluation routes disagree."""


class InsufficientDataError(ChebPadeError):
    """Too few usable samples for a fit."""
