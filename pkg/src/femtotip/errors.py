"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: usage errors exit 1, data/domain
errors exit 2, numerical failures exit 3.
"""


class FemtotipError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(FemtotipError):
    """Bad command-line invocation or unknown model identifier."""


class DataError(FemtotipError):
    """Invalid input data: malformed files, bad columns, broken invariants."""


class DomainError(DataError):
    """Physically invalid argument (e.g. non-positive work function)."""


class NumericalError(FemtotipError):
    """A numerical procedure failed (singular system, non-convergence)."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not reach the requested tolerance.

    Carries diagnostics: the last sample count and the last relative change.
    """

    def __init__(self, message, n_points=None, last_delta=None, rel_tol=None):
        super().__init__(message)
        self.n_points = n_points
        self.last_delta = last_delta
        self.rel_tol = rel_tol
