"""Multivariate time-series container, lag embedding, centering and CSV I/O.

Conventions
-----------
Time is 1-based in docstrings (t = 1..T) to match the estimation equations;
storage is plain 0-based NumPy. A :class:`Panel` holds the raw T x n block
with rows indexed by time. Lagged regressors use zero padding: any value with
a non-positive time index is taken to be zero, so every operation keeps all
T rows usable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, InvalidArgument, ParseError

# 17 significant digits make a float64 round-trip through text bit-exact.
CSV_FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class Panel:
    """A T x n block of real-valued series; rows are time points.

    Parameters
    ----------
    values : ndarray
        T x n matrix of finite floats, rows indexed by time.
    names : tuple of str
        Column labels, one per series.
    start_index : int
        Time index of the first row; purely documentary (default 1).
    """

    values: np.ndarray
    names: tuple[str, ...]
    start_index: int = 1

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise InvalidArgument(f"panel values must be 2-D, got ndim={values.ndim}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise InvalidArgument(f"panel must hold at least one row and one column, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("panel values must be finite (no NaN/Inf)")
        values.flags.writeable = False
        names = tuple(str(c) for c in self.names)
        if len(names) != values.shape[1]:
            raise InvalidArgument(
                f"{len(names)} column names for {values.shape[1]} columns"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", names)

    @property
    def n_periods(self) -> int:
        """Number of time points T."""
        return self.values.shape[0]

    @property
    def n_series(self) -> int:
        """Number of series n."""
        return self.values.shape[1]

    def head(self, t: int) -> "Panel":
        """Return the sub-panel holding the first ``t`` rows."""
        if not 1 <= t <= self.n_periods:
            raise InvalidArgument(f"head length {t} outside 1..{self.n_periods}")
        return Panel(self.values[:t], self.names, self.start_index)


@dataclass(frozen=True)
class LagStack:
    """Row-wise lag embedding of a panel.

    Row t (1-based) holds the concatenation (y'_{t-1}, ..., y'_{t-d}); entries
    whose time index would be non-positive are zero.
    """

    matrix: np.ndarray
    d: int
    p: int

    def block(self, i: int) -> np.ndarray:
        """Columns of lag i (1-based), a T x p slice."""
        if not 1 <= i <= self.d:
            raise InvalidArgument(f"lag index {i} outside 1..{self.d}")
        return self.matrix[:, (i - 1) * self.p : i * self.p]


def load_csv(path, has_header: bool = True) -> Panel:
    """Read a Panel from a comma-separated file.

    Parameters
    ----------
    path : str or Path
        File to read. Body must be rectangular and numeric; one optional
        header row of labels. Completely blank lines are skipped.
    has_header : bool
        Whether the first row holds column labels. When False, labels are
        synthesized as ``c0..c{n-1}``.

    Raises
    ------
    EmptyInput
        If the file contains no data rows.
    ParseError
        On ragged rows (with the row number) or non-numeric cells (with
        row and column numbers); rows are numbered 1-based over data rows.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise EmptyInput(f"empty CSV file: {path}")
    if has_header:
        names = [cell.strip() for cell in rows[0]]
        body = rows[1:]
    else:
        names = None
        body = rows
    if not body:
        raise EmptyInput(f"CSV file has a header but no data rows: {path}")

    n = len(body[0])
    if names is not None and len(names) != n:
        raise ParseError(f"header has {len(names)} fields but row 1 has {n}", row=1)
    values = np.empty((len(body), n))
    for i, row in enumerate(body, start=1):
        if len(row) != n:
            raise ParseError(f"row {i} has {len(row)} fields, expected {n}", row=i)
        for j, cell in enumerate(row, start=1):
            try:
                values[i - 1, j - 1] = float(cell)
            except ValueError:
                raise ParseError(
                    f"non-numeric cell {cell!r} at row {i}, column {j}", row=i, col=j
                ) from None
    if names is None:
        names = [f"c{j}" for j in range(n)]
    return Panel(values, tuple(names))


def save_csv(panel: Panel, path) -> None:
    """Write a Panel as CSV with a header row.

    Floats are formatted with 17 significant digits so that
    ``load_csv(save_csv(p))`` reproduces ``p.values`` bit-exactly.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(panel.names)
        for row in panel.values:
            writer.writerow([CSV_FLOAT_FORMAT % v for v in row])


def center(panel: Panel) -> Panel:
    """Subtract each column's sample mean.

    Idempotent; shape and names preserved.
    """
    values = panel.values - panel.values.mean(axis=0)
    return Panel(values, panel.names, panel.start_index)


def lag_stack(y: Panel, d: int) -> LagStack:
    """Build the lagged regressor rows (y'_{t-1}, ..., y'_{t-d}).

    Row t (1-based) of the result stacks the d previous observations of y,
    most recent first, with zeros where the lagged index falls at or before
    time 0. The output has T rows and d*p columns, so the row at time t can
    be used as the regressor for a target observed at time t.

    Raises
    ------
    InvalidArgument
        If d is not a positive integer.
    """
    if int(d) != d or d <= 0:
        raise InvalidArgument(f"lag order must be a positive integer, got {d}")
    d = int(d)
    values = y.values
    T, p = values.shape
    matrix = np.zeros((T, d * p))
    for i in range(1, d + 1):
        if T - i > 0:
            matrix[i:, (i - 1) * p : i * p] = values[: T - i]
    return LagStack(matrix=matrix, d=d, p=p)
