"""Expanding-window selection of the penalty weights and lag order.

A candidate (lambda_A, lambda_Phi, d) is scored by its one-step-ahead
forecast error over expanding windows: for each origin s = T1, ..., T-1 the
model is refit on periods 1..s and asked to predict period s+1, and

    FE_d(lambda_A, lambda_Phi)
        = (1 / (p (T - T1))) sum_s ||y_hat_{s+1} - y_{s+1}||^2.

The grid point minimizing FE wins; exact ties break toward the smallest d,
then the largest lambda_A, then the largest lambda_Phi (prefer the more
parsimonious model when the data cannot tell them apart).

Each window redoes the whole two-step pipeline on its own sample: the
loadings come from x_1..x_{s-1}, the regression design is the aligned
[z_hat_0, ..., z_hat_{s-1}] with z_hat_0 = 0, and the prediction uses
z_hat_s = Bc_hat' x_s, the window's loadings applied to the last observed
x. The trend count is re-detected in every window unless ``freeze_r`` keeps
the first window's count or ``r`` pins it outright.

Default grids follow the rates lambda_A = C sqrt((p + N) / T) and
lambda_Phi = C sqrt(log(p) / T) with C in {0.25, 0.5, 1, 2, 4} and lag
orders 1..3.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .factors import TrendDetectorConfig, detect_num_trends, estimate_loadings
from .irra import fit_irra
from .panel import Panel
from .regularizers import ProxConfig
from .rrsra import fit_rrsra

_METHODS = ("rrsra", "irra")

_DEFAULT_SCALES = (0.25, 0.5, 1.0, 2.0, 4.0)


def default_lambda_A(p: int, N: int, T: int, scale: float = 1.0) -> float:
    """Rate-matched nuclear penalty sqrt((p + N) / T), times ``scale``."""
    if p < 1 or N < 1 or T < 1:
        raise InvalidArgument("p, N and T must be positive")
    if scale < 0:
        raise InvalidArgument(f"scale must be nonnegative, got {scale}")
    return scale * math.sqrt((p + N) / T)


def default_lambda_Phi(p: int, T: int, scale: float = 1.0) -> float:
    """Rate-matched l1 penalty sqrt(log(p) / T), times ``scale``."""
    if p < 1 or T < 1:
        raise InvalidArgument("p and T must be positive")
    if scale < 0:
        raise InvalidArgument(f"scale must be nonnegative, got {scale}")
    return scale * math.sqrt(math.log(p) / T)


@dataclass(frozen=True)
class TuningGrid:
    """Candidate penalty values and lag orders, crossed into a full grid."""

    lambda_A_values: tuple[float, ...]
    lambda_Phi_values: tuple[float, ...]
    d_values: tuple[int, ...]

    def __post_init__(self):
        lam_a = tuple(float(v) for v in self.lambda_A_values)
        lam_p = tuple(float(v) for v in self.lambda_Phi_values)
        ds = tuple(int(v) for v in self.d_values)
        if not lam_a or not lam_p or not ds:
            raise InvalidArgument("every grid axis needs at least one value")
        if any(v < 0 for v in lam_a) or any(v < 0 for v in lam_p):
            raise InvalidArgument("penalty values must be nonnegative")
        if any(v != orig for v, orig in zip(ds, self.d_values)) or any(v < 0 for v in ds):
            raise InvalidArgument("lag orders must be nonnegative integers")
        object.__setattr__(self, "lambda_A_values", lam_a)
        object.__setattr__(self, "lambda_Phi_values", lam_p)
        object.__setattr__(self, "d_values", ds)

    def points(self) -> list[tuple[int, float, float]]:
        """All (d, lambda_A, lambda_Phi) combinations, d-major order."""
        return [
            (d, lam_a, lam_p)
            for d in self.d_values
            for lam_a in self.lambda_A_values
            for lam_p in self.lambda_Phi_values
        ]

    @property
    def size(self) -> int:
        return (
            len(self.lambda_A_values) * len(self.lambda_Phi_values) * len(self.d_values)
        )


def default_grid(p: int, N: int, T: int, scales=_DEFAULT_SCALES, d_max: int = 3) -> TuningGrid:
    """The rate-based grid with multipliers ``scales`` and lags 1..d_max."""
    if int(d_max) != d_max or d_max < 1:
        raise InvalidArgument(f"d_max must be a positive integer, got {d_max}")
    return TuningGrid(
        lambda_A_values=tuple(default_lambda_A(p, N, T, c) for c in scales),
        lambda_Phi_values=tuple(default_lambda_Phi(p, T, c) for c in scales),
        d_values=tuple(range(1, int(d_max) + 1)),
    )


@dataclass(frozen=True)
class GridScore:
    """One grid point and its expanding-window forecast error."""

    lambda_A: float
    lambda_Phi: float
    d: int
    forecast_error: float


@dataclass(frozen=True)
class TuningResult:
    """Winning grid point plus the full score table."""

    lambda_A: float
    lambda_Phi: float
    d: int
    forecast_error: float
    scores: tuple[GridScore, ...]
    T1: int
    method: str

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "method": self.method,
            "T1": int(self.T1),
            "lambda_A": float(self.lambda_A),
            "lambda_Phi": float(self.lambda_Phi),
            "d": int(self.d),
            "forecast_error": float(self.forecast_error),
            "scores": [
                {
                    "lambda_A": float(g.lambda_A),
                    "lambda_Phi": float(g.lambda_Phi),
                    "d": int(g.d),
                    "forecast_error": float(g.forecast_error),
                }
                for g in self.scores
            ],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "TuningResult":
        scores = tuple(
            GridScore(
                lambda_A=float(g["lambda_A"]),
                lambda_Phi=float(g["lambda_Phi"]),
                d=int(g["d"]),
                forecast_error=float(g["forecast_error"]),
            )
            for g in obj["scores"]
        )
        return cls(
            lambda_A=float(obj["lambda_A"]),
            lambda_Phi=float(obj["lambda_Phi"]),
            d=int(obj["d"]),
            forecast_error=float(obj["forecast_error"]),
            scores=scores,
            T1=int(obj["T1"]),
            method=str(obj["method"]),
        )


def _as_time_major(obj, name: str) -> np.ndarray:
    """Accept a Panel or a T x n array (rows = time) and return the array."""
    if isinstance(obj, Panel):
        return obj.values
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 2:
        raise InvalidArgument(f"{name} must be 2-D with rows as time, got ndim={arr.ndim}")
    return arr


def _check_method(method: str) -> str:
    if method not in _METHODS:
        raise InvalidArgument(f"method must be one of {_METHODS}, got {method!r}")
    return method


def _window_design(xvals: np.ndarray, s: int, r, detector):
    """Factor step of the window ending at s: aligned design and z_hat_s.

    Loadings come from x_1..x_{s-1}; the returned design has columns
    z_hat_0 = 0, z_hat_1, ..., z_hat_{s-1}, and the second value is
    z_hat_s = Bc_hat' x_s for the one-step prediction.
    """
    names = tuple(f"x{j}" for j in range(xvals.shape[1]))
    est = Panel(xvals[: s - 1], names)
    r_hat = detect_num_trends(est, detector) if r is None else int(r)
    fit = estimate_loadings(est, r_hat)
    zfull = xvals[:s] @ fit.Bc_hat
    m = zfull.shape[1]
    Z = np.zeros((m, s))
    Z[:, 1:] = zfull[: s - 1].T
    return Z, zfull[s - 1], r_hat


def _next_lag_vector(yvals: np.ndarray, s: int, d: int) -> np.ndarray:
    """Stacked regressor (y_s', ..., y_{s-d+1}')' used to predict y_{s+1}."""
    p = yvals.shape[1]
    out = np.zeros(d * p)
    for i in range(1, d + 1):
        if s - i >= 0:
            out[(i - 1) * p : i * p] = yvals[s - i]
    return out


def _fit_window(Y_s, Z, d, lambda_A, lambda_Phi, method, cfg, outer_tol, max_outer):
    if method == "rrsra" or d == 0:
        # with no lag block the two objectives coincide (A-only problem)
        return fit_rrsra(Y_s, Z, d, lambda_A, lambda_Phi, outer_tol, max_outer, cfg)
    return fit_irra(Y_s, Z, d, lambda_A, lambda_Phi, None, outer_tol, max_outer, cfg)


def _fit_prediction(fit, z_prev, next_lag) -> np.ndarray:
    A = fit.A_hat
    Phi = fit.Phi_hat if hasattr(fit, "Phi_hat") else fit.Phi_stacked
    yhat = np.zeros(A.shape[0])
    if A.size:
        yhat += A @ z_prev
    if Phi.size:
        yhat += Phi @ next_lag
    return yhat


def _validate_sample(xvals, yvals) -> None:
    if xvals.shape[0] != yvals.shape[0]:
        raise InvalidArgument(
            f"x has {xvals.shape[0]} periods but y has {yvals.shape[0]}"
        )


def predict_one_step(x, y, s: int, d: int, lambda_A: float, lambda_Phi: float,
                     method: str = "rrsra", r=None,
                     detector: TrendDetectorConfig | None = None,
                     cfg: ProxConfig | None = None,
                     outer_tol: float = 1e-6, max_outer: int = 500) -> np.ndarray:
    """Fit on periods 1..s and predict y_{s+1}.

    ``s`` may equal the sample length, in which case the prediction steps
    one period beyond the data. ``r`` pins the trend count; left as None it
    is detected from x_1..x_{s-1}.
    """
    xvals = _as_time_major(x, "x")
    yvals = _as_time_major(y, "y")
    _validate_sample(xvals, yvals)
    _check_method(method)
    T = xvals.shape[0]
    if int(s) != s or not 3 <= s <= T:
        raise InvalidArgument(f"origin s must be an integer in [3, {T}], got {s}")
    s = int(s)
    Z, z_prev, _ = _window_design(xvals, s, r, detector)
    fit = _fit_window(yvals[:s].T, Z, int(d), lambda_A, lambda_Phi, method,
                      cfg, outer_tol, max_outer)
    return _fit_prediction(fit, z_prev, _next_lag_vector(yvals, s, int(d)))


def _evaluate_points(xvals, yvals, points, T1, method, r, freeze_r, detector,
                     cfg, outer_tol, max_outer):
    """Forecast errors for several grid points sharing the window factor step."""
    T, p = yvals.shape
    totals = [0.0 for _ in points]
    effective_r = r
    for s in range(T1, T):
        Z, z_prev, r_hat = _window_design(xvals, s, effective_r, detector)
        if freeze_r and effective_r is None:
            effective_r = r_hat
        Y_s = yvals[:s].T
        next_lags = {d: _next_lag_vector(yvals, s, d) for d in {pt[0] for pt in points}}
        target = yvals[s]
        for idx, (d, lam_a, lam_p) in enumerate(points):
            fit = _fit_window(Y_s, Z, d, lam_a, lam_p, method, cfg, outer_tol, max_outer)
            yhat = _fit_prediction(fit, z_prev, next_lags[d])
            totals[idx] += float(np.sum((yhat - target) ** 2))
    return [total / (p * (T - T1)) for total in totals]


def forecast_error(x, y, d: int, lambda_A: float, lambda_Phi: float, T1: int,
                   method: str = "rrsra", r=None, freeze_r: bool = False,
                   detector: TrendDetectorConfig | None = None,
                   cfg: ProxConfig | None = None,
                   outer_tol: float = 1e-6, max_outer: int = 500) -> float:
    """Expanding-window forecast error of a single (d, lambda) point.

    Averages the squared one-step errors over origins s = T1..T-1 and
    divides by p, so a single window (T1 = T - 1) returns
    ||y_hat_T - y_T||^2 / p.
    """
    xvals = _as_time_major(x, "x")
    yvals = _as_time_major(y, "y")
    _validate_sample(xvals, yvals)
    _check_method(method)
    T = xvals.shape[0]
    if int(T1) != T1 or not 3 <= T1 <= T - 1:
        raise InvalidArgument(f"T1 must be an integer in [3, {T - 1}], got {T1}")
    if int(d) != d or d < 0:
        raise InvalidArgument(f"lag order must be a nonnegative integer, got {d}")
    return _evaluate_points(
        xvals, yvals, [(int(d), float(lambda_A), float(lambda_Phi))], int(T1),
        method, r, freeze_r, detector, cfg, outer_tol, max_outer,
    )[0]


def _chunks(seq, n):
    size = (len(seq) + n - 1) // n
    return [seq[i : i + size] for i in range(0, len(seq), size)]


def select_tuning(x, y, grid: TuningGrid, T1: int, method: str = "rrsra",
                  r=None, freeze_r: bool = False,
                  detector: TrendDetectorConfig | None = None,
                  cfg: ProxConfig | None = None,
                  outer_tol: float = 1e-6, max_outer: int = 500,
                  jobs: int = 1) -> TuningResult:
    """Score every grid point by expanding-window forecast error and pick one.

    The winner minimizes FE; exact ties prefer smaller d, then larger
    lambda_A, then larger lambda_Phi. The full score table is returned in
    the grid's d-major iteration order, which is independent of how the
    work is split across ``jobs`` processes.
    """
    xvals = _as_time_major(x, "x")
    yvals = _as_time_major(y, "y")
    _validate_sample(xvals, yvals)
    _check_method(method)
    T = xvals.shape[0]
    if int(T1) != T1 or not 3 <= T1 <= T - 1:
        raise InvalidArgument(f"T1 must be an integer in [3, {T - 1}], got {T1}")
    if int(jobs) != jobs or jobs < 1:
        raise InvalidArgument(f"jobs must be a positive integer, got {jobs}")
    T1 = int(T1)
    jobs = int(jobs)
    points = grid.points()
    if jobs == 1 or len(points) == 1:
        errors = _evaluate_points(xvals, yvals, points, T1, method, r, freeze_r,
                                  detector, cfg, outer_tol, max_outer)
    else:
        chunks = _chunks(points, min(jobs, len(points)))
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            futures = [
                pool.submit(_evaluate_points, xvals, yvals, chunk, T1, method, r,
                            freeze_r, detector, cfg, outer_tol, max_outer)
                for chunk in chunks
            ]
            errors = [fe for future in futures for fe in future.result()]
    scores = tuple(
        GridScore(lambda_A=lam_a, lambda_Phi=lam_p, d=d, forecast_error=fe)
        for (d, lam_a, lam_p), fe in zip(points, errors)
    )
    best = min(
        scores,
        key=lambda g: (g.forecast_error, g.d, -g.lambda_A, -g.lambda_Phi),
    )
    return TuningResult(
        lambda_A=best.lambda_A,
        lambda_Phi=best.lambda_Phi,
        d=best.d,
        forecast_error=best.forecast_error,
        scores=scores,
        T1=T1,
        method=method,
    )
