"""Exception and warning types shared across the package.

Everything raised on purpose by this package derives from :class:`EffrankError`,
so callers can catch one base class. The CLI maps these onto exit codes:
input/usage problems (ParseError, EmptyInput, InvalidArgument) exit 2, runtime
numerical conditions exit 3.
"""


class EffrankError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgument(EffrankError, ValueError):
    """An argument violates a documented precondition."""


class ParseError(EffrankError, ValueError):
    """A CSV row or cell could not be parsed.

    Attributes
    ----------
    row : int or None
        1-based index of the offending data row (header excluded).
    col : int or None
        1-based column index when the failure is cell-level, else None.
    """

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        super().__init__(message)
        self.row = row
        self.col = col


class EmptyInput(EffrankError, ValueError):
    """An input file or value collection contains no data."""


class EmptyResult(EffrankError, ValueError):
    """The requested object is empty (e.g. no significant directions exist)."""


class DegenerateSeries(EffrankError, ValueError):
    """A series has zero variance where variation is required."""


class DegenerateDesign(EffrankError, ValueError):
    """A design matrix is identically zero where a nonzero one is required."""


class DegenerateInput(EffrankError, ValueError):
    """An input matrix is identically zero where a nonzero one is required."""


class DegenerateTarget(EffrankError, ValueError):
    """A target vector is identically zero where a nonzero one is required."""


class StationarityFailure(EffrankError, RuntimeError):
    """A stationarity requirement could not be enforced."""


class NumericalFailure(EffrankError, ArithmeticError):
    """A solver produced non-finite intermediates."""


class InternalError(EffrankError, RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""


class LeastSquaresUnderdetermined(UserWarning):
    """A least-squares design was rank deficient; the minimum-norm solution
    was returned."""
