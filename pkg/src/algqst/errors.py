"""Exception types shared across the package.

Every error raised by library code derives from :class:`AlgQSTError` so
callers can catch the package's failures with a single except clause.
Pipeline stages annotate propagated errors with a ``stage`` attribute and
a message prefix naming the stage that failed.
"""


class AlgQSTError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(AlgQSTError):
    """Dimension mismatch or an index outside the valid range."""


class InvalidRankError(AlgQSTError):
    """Requested rank is outside [1, D]."""


class InvalidStateError(AlgQSTError):
    """Matrix violates the density-matrix invariants beyond tolerance."""


class InvalidPatternParametersError(AlgQSTError):
    """Block-pattern parameters (D, R, d) are inconsistent."""


class InvalidBasisError(AlgQSTError):
    """Matrix expected to have orthonormal columns does not."""


class InsufficientBlockSizeError(AlgQSTError):
    """A block is smaller than the requested rank."""


class UnderDeterminedColumnError(AlgQSTError):
    """A column has fewer observed entries than the rank.

    Attributes
    ----------
    column : int
        1-based index of the offending column.
    """

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"column {column} has fewer observed entries than the rank")


class IllConditionedColumnError(AlgQSTError):
    """The row-restricted basis for a column is numerically rank deficient.

    Attributes
    ----------
    column : int
        1-based index of the offending column.
    """

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"restricted basis for column {column} is ill conditioned")


class DegenerateEigenvalueSystemError(AlgQSTError):
    """The eigenvalue least-squares design matrix has rank below R."""


class BoundInapplicableError(AlgQSTError):
    """Error-bound preconditions (positive gap exceeding the noise) fail."""


class NonConvergedError(AlgQSTError):
    """Iterative eigensolver hit its iteration limit.

    Carries the best iterate so callers can inspect or accept it.

    Attributes
    ----------
    best_basis : ndarray
        Basis for the best invariant-subspace estimate reached.
    residuals : ndarray
        Final per-vector residual norms.
    """

    def __init__(self, message, best_basis=None, residuals=None):
        self.best_basis = best_basis
        self.residuals = residuals
        super().__init__(message)


class StepSizeError(AlgQSTError):
    """Gradient step produced a non-finite objective; reduce the step."""


class AmbiguousSubspaceWarning(UserWarning):
    """Singular-value tie at the cut position; the subspace is not unique."""
