"""Exception types shared across volkit modules."""


class VolkitError(Exception):
    """Base class for all volkit errors."""


class DomainError(VolkitError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NonConvergence(VolkitError):
    """An iterative procedure hit its iteration cap before reaching tolerance."""


class NonFiniteEvaluation(VolkitError):
    """An integrand or objective returned NaN or infinity."""


class SingularMatrix(VolkitError):
    """A matrix inverse was requested below the singularity floor.

    Carries the offending determinant in ``det``.
    """

    def __init__(self, det: float, msg: str = ""):
        self.det = det
        super().__init__(msg or f"matrix is numerically singular (det={det:.3e})")


class SeriesDivergence(VolkitError):
    """A series failed to converge inside its claimed region of validity."""


class InsufficientData(VolkitError, ValueError):
    """Too few observations for the requested operation."""


class DegenerateData(VolkitError, ValueError):
    """Input data is degenerate (e.g. zero variance)."""


class NonPositiveVariance(VolkitError):
    """A filtered conditional variance was non-positive (internal error)."""


class ParseError(VolkitError, ValueError):
    """A CSV row failed to parse; carries row number, column and reason."""

    def __init__(self, row: int, column: str, reason: str):
        self.row = row
        self.column = column
        self.reason = reason
        super().__init__(f"row {row}, column {column!r}: {reason}")


class DuplicateDate(VolkitError, ValueError):
    """Two price rows share the same timestamp."""


class NonPositivePrice(VolkitError, ValueError):
    """A price observation was zero or negative."""


class BootstrapAborted(VolkitError):
    """More than the tolerated share of bootstrap replicates failed."""
