"""Error types shared by all modules.

Each class carries an ``exit_code`` used by the command line tool:
1 for bad input, 2 for non-convergence, 3 for domain errors.
"""


class HeptamapError(Exception):
    exit_code = 1


class InputError(HeptamapError, ValueError):
    exit_code = 1


class ValidationError(InputError):
    """Polygon or condenser description violating the admissibility rules."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid input")


class MatrixDomainError(InputError):
    """Matrix argument is not symmetric positive definite."""


class DegenerateCurveError(InputError):
    """Branch points too close together or not increasing."""


class DomainError(HeptamapError):
    """Point outside the admissible domain (outside polygon, at a vertex or a pole)."""

    exit_code = 3


class PoleError(DomainError):
    pass


class PathError(DomainError):
    pass


class ConvergenceError(HeptamapError):
    """Iteration failed. ``best`` holds the best iterate when one exists."""

    exit_code = 2

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class AccuracyError(ConvergenceError):
    """A quadrature or extrapolation did not reach its self-consistency target."""
