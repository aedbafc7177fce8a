"""Metrics, benchmark forecasters, and Monte Carlo study drivers.

Everything downstream of a fit lives here: subspace and coefficient
distances against simulation truth, out-of-sample R^2 accounting, the naive
VAR and random-walk baselines, the expanding-window forecast harness, and
the replication loops behind the simulation studies.

Replication protocol: a configuration's coefficient matrices are drawn once
(the scenario), noise is redrawn per replication, and smaller sample sizes
are prefixes of the longest simulated path so that T is the only thing that
varies along a curve.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateTarget,
    InvalidArgument,
    LeastSquaresUnderdetermined,
)
from .factors import (
    TrendDetectorConfig,
    detect_num_trends,
    estimate_loadings,
    factor_recovery_rmse,
)
from .irra import fit_irra
from .panel import Panel
from .regularizers import ProxConfig
from .rrsra import _as_matrix, _lag_design, effective_rank, fit_rrsra
from .simulate import (
    SimSample,
    SimScenario,
    generate,
    make_scenario_irra,
    make_scenario_rrsra,
    replication_rngs,
)
from .tuning import (
    _fit_prediction,
    _fit_window,
    _next_lag_vector,
    _window_design,
    default_lambda_A,
    default_lambda_Phi,
    select_tuning,
)

_FORECAST_METHODS = ("rrsra", "irra", "var", "rw")


def nearest_rank_quantile(values, prob: float) -> float:
    """Nearest-rank quantile: the ceil(prob * n)-th smallest value.

    q(prob) = sorted(values)[max(ceil(prob * n), 1) - 1]; q(0.5) of five
    values is the third smallest, never an interpolation.
    """
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        raise InvalidArgument("cannot take a quantile of no values")
    if not 0.0 <= prob <= 1.0:
        raise InvalidArgument(f"prob must lie in [0, 1], got {prob}")
    k = max(math.ceil(prob * v.size), 1)
    return float(v[k - 1])


@dataclass(frozen=True)
class MetricSummary:
    """One metric across replications: the values and their summary row.

    Quantiles use the nearest-rank rule (see nearest_rank_quantile), std is
    the sample standard deviation (ddof=1, zero for a single value), and n
    always equals len(values).
    """

    name: str
    values: tuple[float, ...]
    n: int
    mean: float
    std: float
    minimum: float
    q25: float
    median: float
    q75: float
    maximum: float

    @classmethod
    def from_values(cls, name: str, values) -> "MetricSummary":
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            raise InvalidArgument(f"no values to summarize for {name!r}")
        std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
        return cls(
            name=name,
            values=tuple(float(x) for x in v),
            n=int(v.size),
            mean=float(np.mean(v)),
            std=std,
            minimum=float(np.min(v)),
            q25=nearest_rank_quantile(v, 0.25),
            median=nearest_rank_quantile(v, 0.5),
            q75=nearest_rank_quantile(v, 0.75),
            maximum=float(np.max(v)),
        )

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "mean": self.mean,
            "std": self.std,
            "min": self.minimum,
            "q25": self.q25,
            "median": self.median,
            "q75": self.q75,
            "max": self.maximum,
        }


def subspace_distance(M1, M2) -> float:
    """Spectral norm of the gap between two orthogonal projectors.

    Both inputs must have orthonormal columns (checked to 1e-8); the
    distance is ||M1 M1' - M2 M2'||_2, which is basis-free. For subspaces of
    equal dimension it lies in [0, 1]; it never exceeds 2.
    """
    M1 = _as_matrix(M1, "M1")
    M2 = _as_matrix(M2, "M2")
    if M1.shape[0] != M2.shape[0]:
        raise InvalidArgument(
            f"ambient dimensions differ: {M1.shape[0]} vs {M2.shape[0]}"
        )
    for name, M in (("M1", M1), ("M2", M2)):
        gram = M.T @ M
        if gram.size and float(np.max(np.abs(gram - np.eye(M.shape[1])))) > 1e-8:
            raise InvalidArgument(f"{name} does not have orthonormal columns")
    diff = M1 @ M1.T - M2 @ M2.T
    return float(np.linalg.norm(diff, 2)) if diff.size else 0.0


def oos_r2(actual, predicted) -> float:
    """1 - ||actual - predicted||^2 / ||actual||^2, pooled over all entries.

    Raises
    ------
    DegenerateTarget
        If the actual values are identically zero.
    """
    a = np.asarray(actual, dtype=float)
    pred = np.asarray(predicted, dtype=float)
    if a.shape != pred.shape:
        raise InvalidArgument(f"shape mismatch: {a.shape} vs {pred.shape}")
    denom = float(np.sum(a**2))
    if denom == 0.0:
        raise DegenerateTarget("actual values are identically zero")
    return 1.0 - float(np.sum((a - pred) ** 2)) / denom


def fit_rmse(scenario: SimScenario, sample: SimSample, fit, Z_hat) -> float:
    """Root mean squared gap between true and fitted conditional means.

    Both means are evaluated on the realized sample: the truth uses the
    scenario's A and lag matrices with the latent z, the fit uses its own
    coefficients with the estimated design Z_hat that produced it. The mean
    square is taken over all p * T entries.
    """
    Z_hat = _as_matrix(Z_hat, "Z_hat")
    T = sample.y.n_periods
    if Z_hat.shape[1] != T:
        raise InvalidArgument(f"Z_hat covers {Z_hat.shape[1]} periods, sample has {T}")
    A_hat = np.asarray(fit.A_hat, dtype=float)
    if A_hat.shape[1] != Z_hat.shape[0]:
        raise InvalidArgument(
            f"fit expects {A_hat.shape[1]} proxies, Z_hat has {Z_hat.shape[0]}"
        )
    Y = sample.y.values.T
    p = Y.shape[0]
    if A_hat.shape[0] != p:
        raise InvalidArgument(f"fit is for {A_hat.shape[0]} targets, sample has {p}")

    Z_true = np.zeros((sample.z.shape[0], T))
    Z_true[:, 1:] = sample.z[:, : T - 1]
    true_mean = scenario.A @ Z_true
    if scenario.d > 0:
        true_mean = true_mean + scenario.Phi_stacked @ _lag_design(Y, scenario.d)

    Phi_hat = fit.Phi_hat if hasattr(fit, "Phi_hat") else fit.Phi_stacked
    est_mean = A_hat @ Z_hat if A_hat.size else np.zeros((p, T))
    if Phi_hat.size:
        est_mean = est_mean + Phi_hat @ _lag_design(Y, fit.d)
    return float(np.sqrt(np.mean((true_mean - est_mean) ** 2)))


def naive_var_fit(y, d: int = 1) -> np.ndarray:
    """Least-squares VAR(d) coefficients, p x (d*p), minimum-norm on ties.

    Regresses y_t on the stacked lags with zero pre-sample padding (the
    all-zero initial regressors contribute nothing to the normal equations,
    so for d = 1 this equals the textbook regression that drops t = 1).

    Warns
    -----
    LeastSquaresUnderdetermined
        When the lag design is rank deficient; the minimum-norm solution is
        returned anyway.
    """
    vals = y.values if isinstance(y, Panel) else np.asarray(y, dtype=float)
    if vals.ndim != 2:
        raise InvalidArgument(f"y must be 2-D with rows as time, got ndim={vals.ndim}")
    if int(d) != d or d < 0:
        raise InvalidArgument(f"lag order must be a nonnegative integer, got {d}")
    d = int(d)
    Y = vals.T
    p = Y.shape[0]
    if d == 0:
        return np.zeros((p, 0))
    P = _lag_design(Y, d)
    solution, _, rank, _ = np.linalg.lstsq(P.T, Y.T, rcond=None)
    if rank < P.shape[0]:
        warnings.warn(
            f"lag design has rank {rank} < {P.shape[0]}; minimum-norm solution",
            LeastSquaresUnderdetermined,
            stacklevel=2,
        )
    return solution.T


def random_walk_predict(y) -> np.ndarray:
    """Random-walk forecasts: the prediction for period t+1 is y_t.

    Returns a copy of the panel's values; row t is the forecast issued at
    time t for time t+1.
    """
    vals = y.values if isinstance(y, Panel) else np.asarray(y, dtype=float)
    if vals.ndim != 2:
        raise InvalidArgument(f"y must be 2-D with rows as time, got ndim={vals.ndim}")
    return np.array(vals, dtype=float, copy=True)


@dataclass(frozen=True)
class ForecastReport:
    """One-step forecasts over the evaluation segment and their accounting.

    Row j of ``predictions`` and ``targets`` refers to period
    split_index + j + 1. ``per_origin_r2`` applies the R^2 formula to each
    origin separately; ``mean_r2`` averages those; ``r2`` pools all entries
    before taking the ratio.
    """

    method: str
    split_index: int
    d: int | None
    lambda_A: float | None
    lambda_Phi: float | None
    predictions: np.ndarray
    targets: np.ndarray
    per_origin_r2: tuple[float, ...]
    r2_summary: MetricSummary
    mean_r2: float
    r2: float
    forecast_error: float

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "method": self.method,
            "split_index": int(self.split_index),
            "d": None if self.d is None else int(self.d),
            "lambda_A": None if self.lambda_A is None else float(self.lambda_A),
            "lambda_Phi": None if self.lambda_Phi is None else float(self.lambda_Phi),
            "n_origins": int(self.predictions.shape[0]),
            "per_origin_r2": [float(v) for v in self.per_origin_r2],
            "r2_oos": {
                k: v for k, v in self.r2_summary.as_dict().items() if k != "name"
            },
            "mean_r2": float(self.mean_r2),
            "r2": float(self.r2),
            "forecast_error": float(self.forecast_error),
        }


def run_expanding_window(x, y, split_index: int, method: str = "rrsra",
                         d: int = 1, lambda_A: float | None = None,
                         lambda_Phi: float | None = None, r=None,
                         freeze_r: bool = False,
                         detector: TrendDetectorConfig | None = None,
                         cfg: ProxConfig | None = None,
                         outer_tol: float = 1e-6, max_outer: int = 500,
                         grid=None, tune_windows: int = 10,
                         retune_per_origin: bool = False,
                         jobs: int = 1) -> ForecastReport:
    """One-step forecasts from every origin s = split_index .. T-1.

    ``method`` is one of rrsra, irra, var, rw. The penalized methods refit
    the full two-step pipeline at every origin; missing penalty weights
    default to the rates at the split length (lambda_Phi defaults to 1 for
    irra, whose weights already carry the scale). Passing a TuningGrid as
    ``grid`` selects (lambda_A, lambda_Phi, d) by expanding-window forecast
    error inside the training segment, using ``tune_windows`` tuning
    origins; ``retune_per_origin`` repeats that selection at every forecast
    origin instead of once at the split.
    """
    xvals = x.values if isinstance(x, Panel) else np.asarray(x, dtype=float)
    yvals = y.values if isinstance(y, Panel) else np.asarray(y, dtype=float)
    if xvals.ndim != 2 or yvals.ndim != 2:
        raise InvalidArgument("x and y must be 2-D with rows as time")
    if xvals.shape[0] != yvals.shape[0]:
        raise InvalidArgument(
            f"x has {xvals.shape[0]} periods but y has {yvals.shape[0]}"
        )
    if method not in _FORECAST_METHODS:
        raise InvalidArgument(f"method must be one of {_FORECAST_METHODS}, got {method!r}")
    T, p = yvals.shape
    N = xvals.shape[1]
    if int(split_index) != split_index or not 3 <= split_index <= T - 1:
        raise InvalidArgument(
            f"split_index must be an integer in [3, {T - 1}], got {split_index}"
        )
    split_index = int(split_index)
    if int(d) != d or d < 0:
        raise InvalidArgument(f"lag order must be a nonnegative integer, got {d}")
    d = int(d)

    penalized = method in ("rrsra", "irra")
    if penalized:
        if lambda_A is None:
            lambda_A = default_lambda_A(p, N, split_index)
        if lambda_Phi is None:
            lambda_Phi = 1.0 if method == "irra" else default_lambda_Phi(p, split_index)
        if grid is not None and not retune_per_origin:
            choice = select_tuning(
                xvals[:split_index], yvals[:split_index], grid,
                T1=max(3, split_index - int(tune_windows)), method=method, r=r,
                freeze_r=freeze_r, detector=detector, cfg=cfg,
                outer_tol=outer_tol, max_outer=max_outer, jobs=jobs,
            )
            lambda_A, lambda_Phi, d = choice.lambda_A, choice.lambda_Phi, choice.d

    origins = range(split_index, T)
    predictions = np.zeros((T - split_index, p))
    effective_r = r
    for row, s in enumerate(origins):
        if method == "rw":
            predictions[row] = yvals[s - 1]
            continue
        if method == "var":
            Phi = naive_var_fit(yvals[:s], d)
            predictions[row] = Phi @ _next_lag_vector(yvals, s, d) if Phi.size else 0.0
            continue
        if grid is not None and retune_per_origin:
            choice = select_tuning(
                xvals[:s], yvals[:s], grid, T1=max(3, s - int(tune_windows)),
                method=method, r=r, freeze_r=freeze_r, detector=detector,
                cfg=cfg, outer_tol=outer_tol, max_outer=max_outer, jobs=jobs,
            )
            lambda_A, lambda_Phi, d = choice.lambda_A, choice.lambda_Phi, choice.d
        Z, z_prev, r_hat = _window_design(xvals, s, effective_r, detector)
        if freeze_r and effective_r is None:
            effective_r = r_hat
        fit = _fit_window(yvals[:s].T, Z, d, lambda_A, lambda_Phi, method,
                          cfg, outer_tol, max_outer)
        predictions[row] = _fit_prediction(fit, z_prev, _next_lag_vector(yvals, s, d))

    targets = yvals[split_index:].copy()
    per_origin = tuple(
        oos_r2(targets[j], predictions[j]) for j in range(targets.shape[0])
    )
    return ForecastReport(
        method=method,
        split_index=split_index,
        d=d if method != "rw" else None,
        lambda_A=float(lambda_A) if penalized else None,
        lambda_Phi=float(lambda_Phi) if penalized else None,
        predictions=predictions,
        targets=targets,
        per_origin_r2=per_origin,
        r2_summary=MetricSummary.from_values("r2_oos", per_origin),
        mean_r2=float(np.mean(per_origin)),
        r2=oos_r2(targets, predictions),
        forecast_error=float(np.sum((targets - predictions) ** 2))
        / (p * targets.shape[0]),
    )


def aligned_design(xvals, Bc_hat) -> np.ndarray:
    """Full-sample aligned design [z_hat_0, ..., z_hat_{T-1}] with z_hat_0 = 0.

    Column t of the result is the regressor standing next to y_t, namely
    Bc_hat' x_{t-1}, so the matrix lines up with a p x T target along time.
    """
    xvals = np.asarray(xvals, dtype=float)
    Bc_hat = np.asarray(Bc_hat, dtype=float)
    if xvals.ndim != 2 or Bc_hat.ndim != 2 or xvals.shape[1] != Bc_hat.shape[0]:
        raise InvalidArgument(
            f"incompatible shapes {xvals.shape} and {Bc_hat.shape}"
        )
    zhat = xvals @ Bc_hat
    Z = np.zeros((zhat.shape[1], zhat.shape[0]))
    Z[:, 1:] = zhat[: zhat.shape[0] - 1].T
    return Z


def _spectral(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def _rrsra_rep(scenario, rng, T_values, r, d, scale_A, scale_Phi, rel_tol,
               cfg, outer_tol, max_outer):
    sample = generate(scenario, rng)
    out = {}
    for T in T_values:
        part = sample.head(T)
        ffit = estimate_loadings(part.x, r)
        Z = aligned_design(part.x.values, ffit.Bc_hat)
        lam_a = default_lambda_A(scenario.p, scenario.N, T, scale_A)
        lam_p = default_lambda_Phi(scenario.p, T, scale_Phi)
        fit = fit_rrsra(part.y.values.T, Z, d, lam_a, lam_p, outer_tol,
                        max_outer, cfg)
        report = effective_rank(fit, rel_tol)
        out[T] = {
            "loading_dist": subspace_distance(scenario.B, ffit.B_hat),
            "factor_rmse": factor_recovery_rmse(scenario.B, part.f, ffit),
            "a_dist": _spectral(fit.A_hat @ fit.A_hat.T - scenario.A @ scenario.A.T),
            "phi_dist": _spectral(fit.Phi_hat - scenario.Phi_stacked),
            "fit_rmse": fit_rmse(scenario, part, fit, Z),
            "rank_A": report.rank_A,
            "support_match": set(report.support_Phi) == set(scenario.support_Phi),
            "iterations": fit.iterations,
            "converged": fit.converged,
        }
    return out


def _irra_rep(scenario, rng, T_values, r, d, scale_A, lambda_Phi, rel_tol,
              cfg, outer_tol, max_outer):
    sample = generate(scenario, rng)
    out = {}
    for T in T_values:
        part = sample.head(T)
        ffit = estimate_loadings(part.x, r)
        Z = aligned_design(part.x.values, ffit.Bc_hat)
        lam_a = default_lambda_A(scenario.p, scenario.N, T, scale_A)
        fit = fit_irra(part.y.values.T, Z, d, lam_a, lambda_Phi, None,
                       outer_tol, max_outer, cfg)
        report = effective_rank(fit, rel_tol)
        record = {
            "loading_dist": subspace_distance(scenario.B, ffit.B_hat),
            "factor_rmse": factor_recovery_rmse(scenario.B, part.f, ffit),
            "a_dist": _spectral(fit.A_hat @ fit.A_hat.T - scenario.A @ scenario.A.T),
            "fit_rmse": fit_rmse(scenario, part, fit, Z),
            "rank_A": report.rank_A,
            "iterations": fit.iterations,
            "converged": fit.converged,
        }
        for i, (Phi_hat, Phi) in enumerate(zip(fit.Phi_hats, scenario.Phis), start=1):
            record[f"phi{i}_dist"] = _spectral(Phi_hat - Phi)
            sv = np.linalg.svd(Phi_hat, compute_uv=False)
            top = float(sv[0]) if sv.size else 0.0
            record[f"rank_phi{i}"] = (
                int(np.sum(sv > rel_tol * top)) if top > 0 else 0
            )
        out[T] = record
    return out


def _run_study(rep_fn, scenario, seed, n_reps, T_values, jobs, args):
    rngs = replication_rngs(seed, n_reps)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(rep_fn, scenario, rng, T_values, *args) for rng in rngs
            ]
            records = [f.result() for f in futures]
    else:
        records = [rep_fn(scenario, rng, T_values, *args) for rng in rngs]
    return {T: [rec[T] for rec in records] for T in T_values}


def run_rrsra_study(p: int, N: int, T_values, n_reps: int, seed: int,
                    r: int = 3, d: int | None = None, scale_A: float = 1.0,
                    scale_Phi: float = 1.0, rel_tol: float = 1e-2,
                    cfg: ProxConfig | None = None, outer_tol: float = 1e-6,
                    max_outer: int = 500, jobs: int = 1) -> dict:
    """Replication study of the sparse-lag design at one (p, N).

    Coefficients are drawn once from ``seed``; each of ``n_reps``
    replications redraws the noise, simulates at max(T_values), and is
    evaluated at every prefix length in T_values with penalties
    scale_A * sqrt((p + N)/T) and scale_Phi * sqrt(log(p)/T).

    Returns {T: [record, ...]} where each record holds loading_dist,
    factor_rmse, a_dist (||A_hat A_hat' - A A'||_2), phi_dist
    (||Phi_hat - Phi||_2), fit_rmse, rank_A, support_match, iterations and
    converged.
    """
    T_values = sorted({int(T) for T in T_values})
    scenario = make_scenario_rrsra(p, N, r, max(T_values), seed)
    fit_d = scenario.d if d is None else int(d)
    return _run_study(
        _rrsra_rep, scenario, seed, n_reps, T_values, int(jobs),
        (r, fit_d, scale_A, scale_Phi, rel_tol, cfg, outer_tol, max_outer),
    )


def run_irra_study(p: int, N: int, T_values, n_reps: int, seed: int,
                   r: int = 3, d: int | None = None, scale_A: float = 1.0,
                   lambda_Phi: float = 1.0, rel_tol: float = 1e-2,
                   cfg: ProxConfig | None = None, outer_tol: float = 1e-6,
                   max_outer: int = 500, jobs: int = 1) -> dict:
    """Replication study of the low-rank-lag design at one (p, N).

    Same protocol as the sparse-lag study, with per-block records
    phi{i}_dist and rank_phi{i}. lambda_Phi multiplies the data-driven
    weights, so 1.0 is the natural default.
    """
    T_values = sorted({int(T) for T in T_values})
    scenario = make_scenario_irra(p, N, r, max(T_values), seed)
    fit_d = scenario.d if d is None else int(d)
    return _run_study(
        _irra_rep, scenario, seed, n_reps, T_values, int(jobs),
        (r, fit_d, scale_A, lambda_Phi, rel_tol, cfg, outer_tol, max_outer),
    )


def _detection_rep(scenario, rng, T_values, detector):
    sample = generate(scenario, rng)
    return {T: detect_num_trends(sample.x.head(T), detector) for T in T_values}


def _loading_rep(scenario, rng, T_values, r):
    sample = generate(scenario, rng)
    out = {}
    for T in T_values:
        ffit = estimate_loadings(sample.x.head(T), r)
        out[T] = subspace_distance(scenario.B, ffit.B_hat)
    return out


def run_detection_study(N_values, T_values, n_reps: int, seed: int,
                        p: int = 20, r: int = 3,
                        detector: TrendDetectorConfig | None = None,
                        jobs: int = 1) -> dict:
    """Detected trend counts per (N, T) cell, one scenario per N.

    Returns {(N, T): [r_hat, ...]} with n_reps entries per cell. The
    detector sees only x, so p matters only through the scenario's validity
    checks.
    """
    T_values = sorted({int(T) for T in T_values})
    results = {}
    for i, N in enumerate(N_values):
        config_seed = seed + 101 * i
        scenario = make_scenario_rrsra(p, int(N), r, max(T_values), config_seed)
        per_T = _run_study(
            _detection_rep, scenario, config_seed, n_reps, T_values, int(jobs),
            (detector,),
        )
        for T in T_values:
            results[(int(N), T)] = per_T[T]
    return results


def run_loading_study(N_values, T_values, n_reps: int, seed: int,
                      p: int = 20, r: int = 3, jobs: int = 1) -> dict:
    """Loading-space recovery ||B_hat B_hat' - B B'||_2 per (N, T) cell.

    Same scenario-per-N protocol as the detection study; the loadings are
    estimated with the true r so the metric isolates eigenvector accuracy.
    """
    T_values = sorted({int(T) for T in T_values})
    results = {}
    for i, N in enumerate(N_values):
        config_seed = seed + 101 * i
        scenario = make_scenario_rrsra(p, int(N), r, max(T_values), config_seed)
        per_T = _run_study(
            _loading_rep, scenario, config_seed, n_reps, T_values, int(jobs), (r,)
        )
        for T in T_values:
            results[(int(N), T)] = per_T[T]
    return results
