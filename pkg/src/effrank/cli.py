"""Command-line frontend: simulate / fit / tune / forecast / eval pipelines.

Every subcommand reads and writes plain files: CSV panels (see the panel
module for the format), JSON reports carrying a schema_version field, and
optional PNG figures rendered next to the delimited outputs when --figures
is passed. Outputs are deterministic given the flags; every random quantity
takes an explicit seed.

Exit codes: 0 on success, 2 for usage and parse problems (bad flags,
malformed input files, out-of-range parameters), 3 for numerical failures
at runtime. --jobs parallelizes Monte Carlo replications and tuning-grid
points; the EFFRANK_JOBS environment variable supplies a default.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .errors import EffrankError, EmptyInput, InvalidArgument, ParseError
from .evaluation import (
    MetricSummary,
    aligned_design,
    run_detection_study,
    run_expanding_window,
    run_irra_study,
    run_loading_study,
    run_rrsra_study,
)
from .factors import TrendDetectorConfig, detect_num_trends, estimate_loadings
from .irra import IrraFit, fit_irra
from .panel import Panel, center, load_csv, save_csv
from .rrsra import RrsraFit, effective_rank, fit_rrsra
from .simulate import generate, make_scenario_irra, make_scenario_rrsra, replication_rngs
from .tuning import (
    TuningGrid,
    _next_lag_vector,
    default_grid,
    default_lambda_A,
    default_lambda_Phi,
    select_tuning,
)


def _write_json(obj: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt_cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return "%.17g" % float(value)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt_cell(v) for v in row) + "\n")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def _resolve_jobs(args) -> int:
    jobs = getattr(args, "jobs", None)
    if jobs is None:
        raw = os.environ.get("EFFRANK_JOBS", "1")
        try:
            jobs = int(raw)
        except ValueError:
            raise InvalidArgument(f"EFFRANK_JOBS must be an integer, got {raw!r}")
    if jobs < 1:
        raise InvalidArgument(f"--jobs must be >= 1, got {jobs}")
    return int(jobs)


def _load_panel(path: str, do_center: bool) -> Panel:
    panel = load_csv(path)
    return center(panel) if do_center else panel


def _load_pair(args) -> tuple[Panel, Panel]:
    x = _load_panel(args.x, args.center)
    y = _load_panel(args.y, args.center)
    if x.n_periods != y.n_periods:
        raise InvalidArgument(
            f"x has {x.n_periods} periods but y has {y.n_periods}"
        )
    return x, y


def _detector(args) -> TrendDetectorConfig:
    return TrendDetectorConfig(k_bar=args.k_bar, delta0=args.delta0)


def _emit(path: str) -> None:
    print(path)


def cmd_simulate(args) -> int:
    for name, value in (("p", args.p), ("N", args.N), ("T", args.T)):
        if value < 1:
            raise InvalidArgument(f"--{name} must be >= 1, got {value}")
    if args.r < 0:
        raise InvalidArgument(f"--r must be >= 0, got {args.r}")
    maker = make_scenario_rrsra if args.dgp == "rrsra" else make_scenario_irra
    scenario = maker(args.p, args.N, args.r, args.T, args.seed)
    sample = generate(scenario, replication_rngs(args.seed, 1)[0])
    os.makedirs(args.out, exist_ok=True)
    x_path = os.path.join(args.out, "x.csv")
    y_path = os.path.join(args.out, "y.csv")
    truth_path = os.path.join(args.out, "truth.json")
    save_csv(sample.x, x_path)
    save_csv(sample.y, y_path)
    _write_json(scenario.to_json_dict(), truth_path)
    for path in (x_path, y_path, truth_path):
        _emit(path)
    return 0


def _default_penalties(args, p: int, N: int, T: int) -> tuple[float, float]:
    lam_a = args.lambda_A
    if lam_a is None:
        lam_a = default_lambda_A(p, N, T)
    lam_p = args.lambda_Phi
    if lam_p is None:
        lam_p = 1.0 if args.method == "irra" else default_lambda_Phi(p, T)
    return float(lam_a), float(lam_p)


def _block_ranks(fit: IrraFit, rel_tol: float) -> list[int]:
    ranks = []
    for Phi in fit.Phi_hats:
        sv = np.linalg.svd(Phi, compute_uv=False)
        top = float(sv[0]) if sv.size else 0.0
        ranks.append(int(np.sum(sv > rel_tol * top)) if top > 0 else 0)
    return ranks


def cmd_fit(args) -> int:
    x, y = _load_pair(args)
    r_hat = int(args.r) if args.r is not None else detect_num_trends(x, _detector(args))
    ffit = estimate_loadings(x, r_hat)
    Z = aligned_design(x.values, ffit.Bc_hat)
    p, N, T = y.n_series, x.n_series, y.n_periods
    lam_a, lam_p = _default_penalties(args, p, N, T)
    if args.method == "rrsra":
        fit = fit_rrsra(y.values.T, Z, args.d, lam_a, lam_p,
                        outer_tol=args.outer_tol, max_outer=args.max_outer)
    else:
        fit = fit_irra(y.values.T, Z, args.d, lam_a, lam_p,
                       outer_tol=args.outer_tol, max_outer=args.max_outer,
                       jacobi=args.jacobi)
    report = effective_rank(fit, args.rel_tol)
    rank_report = {
        "rel_tol": float(args.rel_tol),
        "rank_A": report.rank_A,
        "singular_values": [float(v) for v in report.singular_values],
        "support_Phi": [[int(i), int(j)] for i, j in report.support_Phi],
        "cardinality": report.cardinality,
    }
    if args.method == "irra":
        rank_report["ranks_Phi"] = _block_ranks(fit, args.rel_tol)
    payload = {
        "schema_version": 1,
        "method": args.method,
        "center": bool(args.center),
        "r_hat": r_hat,
        "rank_A": report.rank_A,
        "factor": ffit.to_json_dict(),
        "fit": fit.to_json_dict(),
        "effective_rank": rank_report,
    }
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "fit.json")
    _write_json(payload, path)
    _emit(path)
    return 0


def _grid_from_args(args, p: int, N: int, ref_T: int) -> TuningGrid:
    base = default_grid(p, N, ref_T, d_max=max(args.d_grid) if args.d_grid else 3)
    return TuningGrid(
        lambda_A_values=args.lambda_A_grid or base.lambda_A_values,
        lambda_Phi_values=args.lambda_Phi_grid or base.lambda_Phi_values,
        d_values=args.d_grid or base.d_values,
    )


def cmd_tune(args) -> int:
    x, y = _load_pair(args)
    grid = _grid_from_args(args, y.n_series, x.n_series, x.n_periods)
    result = select_tuning(
        x, y, grid, args.T1, method=args.method, r=args.r, freeze_r=args.freeze_r,
        detector=_detector(args), outer_tol=args.outer_tol,
        max_outer=args.max_outer, jobs=_resolve_jobs(args),
    )
    os.makedirs(args.out, exist_ok=True)
    json_path = os.path.join(args.out, "tuning.json")
    _write_json(result.to_json_dict(), json_path)
    _emit(json_path)
    csv_path = os.path.join(args.out, "tuning_scores.csv")
    _write_csv(
        csv_path,
        ["d", "lambda_A", "lambda_Phi", "forecast_error"],
        [[g.d, g.lambda_A, g.lambda_Phi, g.forecast_error] for g in result.scores],
    )
    _emit(csv_path)
    if args.figures:
        from .report import save_tuning_heatmap

        _emit(save_tuning_heatmap(result, os.path.join(args.out, "tuning_fe.png")))
    return 0


def _fixed_fit_predictions(args, x: Panel, y: Panel) -> Panel:
    with open(args.fit, encoding="utf-8") as fh:
        payload = json.load(fh)
    method = payload["method"]
    if method not in ("rrsra", "irra"):
        raise InvalidArgument(f"fit file has unknown method {method!r}")
    Bc_hat = np.asarray(payload["factor"]["Bc_hat"], dtype=float)
    if Bc_hat.ndim == 1:
        Bc_hat = Bc_hat.reshape(x.n_series, 0)
    if Bc_hat.shape[0] != x.n_series:
        raise InvalidArgument(
            f"fit expects {Bc_hat.shape[0]} observed series, x has {x.n_series}"
        )
    fit = (RrsraFit if method == "rrsra" else IrraFit).from_json_dict(payload["fit"])
    A = fit.A_hat
    Phi = fit.Phi_hat if method == "rrsra" else fit.Phi_stacked
    if A.shape[0] != y.n_series:
        raise InvalidArgument(f"fit is for {A.shape[0]} targets, y has {y.n_series}")
    zfull = x.values @ Bc_hat
    T, p = y.n_periods, y.n_series
    predictions = np.zeros((T, p))
    for s in range(1, T + 1):
        row = A @ zfull[s - 1] if A.size else np.zeros(p)
        if Phi.size:
            row = row + Phi @ _next_lag_vector(y.values, s, fit.d)
        predictions[s - 1] = row
    # row s-1 predicts period s+1, hence the documentary start index of 2
    return Panel(predictions, y.names, start_index=2)


def cmd_forecast(args) -> int:
    x, y = _load_pair(args)
    os.makedirs(args.out, exist_ok=True)
    if args.fit is not None:
        panel = _fixed_fit_predictions(args, x, y)
        path = os.path.join(args.out, "predictions.csv")
        save_csv(panel, path)
        _emit(path)
        return 0
    if args.split is None:
        raise InvalidArgument("--split is required unless --fit is given")
    grid = None
    if args.auto_tune:
        grid = _grid_from_args(args, y.n_series, x.n_series, args.split)
    report = run_expanding_window(
        x, y, args.split, method=args.method, d=args.d, lambda_A=args.lambda_A,
        lambda_Phi=args.lambda_Phi, r=args.r, freeze_r=args.freeze_r,
        detector=_detector(args), outer_tol=args.outer_tol,
        max_outer=args.max_outer, grid=grid, tune_windows=args.tune_windows,
        retune_per_origin=args.retune_per_origin, jobs=_resolve_jobs(args),
    )
    pred_path = os.path.join(args.out, "predictions.csv")
    save_csv(Panel(report.predictions, y.names, start_index=args.split + 1), pred_path)
    _emit(pred_path)
    r2_path = os.path.join(args.out, "r2_oos.csv")
    _write_csv(
        r2_path,
        ["origin", "r2_oos"],
        [
            [args.split + 1 + j, v]
            for j, v in enumerate(report.per_origin_r2)
        ],
    )
    _emit(r2_path)
    json_path = os.path.join(args.out, "report.json")
    _write_json(report.to_json_dict(), json_path)
    _emit(json_path)
    if args.figures:
        from .report import save_forecast_paths

        _emit(save_forecast_paths(report, os.path.join(args.out, "forecast_r2.png")))
    return 0


_SUMMARY_HEADER = ["n", "mean", "std", "min", "q25", "median", "q75", "max"]


def _summary_row(summary: MetricSummary) -> list:
    return [
        summary.n, summary.mean, summary.std, summary.minimum, summary.q25,
        summary.median, summary.q75, summary.maximum,
    ]


def _eval_fit_study(args, out: str, jobs: int) -> None:
    common = dict(
        T_values=args.T_grid, n_reps=args.reps, seed=args.seed, r=args.r,
        d=args.d, scale_A=args.scale_A, rel_tol=args.rel_tol,
        outer_tol=args.outer_tol, max_outer=args.max_outer, jobs=jobs,
    )
    if args.study == "rrsra":
        records = run_rrsra_study(args.p, args.N, scale_Phi=args.scale_Phi, **common)
    else:
        records = run_irra_study(args.p, args.N, lambda_Phi=args.lambda_Phi, **common)
    T_values = sorted(records)
    keys = list(records[T_values[0]][0].keys())
    _write_csv(
        os.path.join(out, "records.csv"),
        ["T", "rep"] + keys,
        [
            [T, rep] + [rec[k] for k in keys]
            for T in T_values
            for rep, rec in enumerate(records[T])
        ],
    )
    _emit(os.path.join(out, "records.csv"))
    summaries = {}
    summary_rows = []
    for T in T_values:
        summaries[str(T)] = {}
        for k in keys:
            s = MetricSummary.from_values(k, [float(rec[k]) for rec in records[T]])
            summaries[str(T)][k] = {
                key: val for key, val in s.as_dict().items() if key != "name"
            }
            summary_rows.append([T, k] + _summary_row(s))
    _write_csv(
        os.path.join(out, "summary.csv"),
        ["T", "metric"] + _SUMMARY_HEADER,
        summary_rows,
    )
    _emit(os.path.join(out, "summary.csv"))
    meta = {
        "schema_version": 1,
        "study": args.study,
        "p": args.p,
        "N": args.N,
        "r": args.r,
        "d": args.d,
        "reps": args.reps,
        "seed": args.seed,
        "T_grid": list(args.T_grid),
        "scale_A": args.scale_A,
        "scale_Phi": args.scale_Phi if args.study == "rrsra" else None,
        "lambda_Phi": args.lambda_Phi if args.study == "irra" else None,
        "rel_tol": args.rel_tol,
        "summaries": summaries,
    }
    _write_json(meta, os.path.join(out, "study.json"))
    _emit(os.path.join(out, "study.json"))
    if args.figures:
        from .report import save_study_boxplots

        wanted = ("a_dist", "phi_dist", "phi1_dist", "phi2_dist", "fit_rmse")
        metrics = [k for k in wanted if k in keys]
        _emit(
            save_study_boxplots(
                records, metrics, os.path.join(out, "study_metrics.png"),
                title=f"{args.study} (p={args.p}, N={args.N})",
            )
        )


def _eval_panel_study(args, out: str, jobs: int) -> None:
    if args.study == "detection":
        results = run_detection_study(
            args.N_grid, args.T_grid, args.reps, args.seed, p=args.p, r=args.r,
            detector=_detector(args), jobs=jobs,
        )
        metric = "r_hat"
    else:
        results = run_loading_study(
            args.N_grid, args.T_grid, args.reps, args.seed, p=args.p, r=args.r,
            jobs=jobs,
        )
        metric = "loading_dist"
    cells = sorted(results)
    _write_csv(
        os.path.join(out, "records.csv"),
        ["N", "T", "rep", metric],
        [
            [N, T, rep, value]
            for (N, T) in cells
            for rep, value in enumerate(results[(N, T)])
        ],
    )
    _emit(os.path.join(out, "records.csv"))
    summaries = {}
    summary_rows = []
    if args.study == "detection":
        header = ["N", "T", "n", "fraction_correct"]
        for N, T in cells:
            values = results[(N, T)]
            frac = float(np.mean([v == args.r for v in values]))
            summary_rows.append([N, T, len(values), frac])
            summaries[f"N{N}_T{T}"] = {"n": len(values), "fraction_correct": frac}
    else:
        header = ["N", "T"] + _SUMMARY_HEADER
        for N, T in cells:
            s = MetricSummary.from_values(metric, results[(N, T)])
            summary_rows.append([N, T] + _summary_row(s))
            summaries[f"N{N}_T{T}"] = {
                key: val for key, val in s.as_dict().items() if key != "name"
            }
    _write_csv(os.path.join(out, "summary.csv"), header, summary_rows)
    _emit(os.path.join(out, "summary.csv"))
    meta = {
        "schema_version": 1,
        "study": args.study,
        "p": args.p,
        "r": args.r,
        "reps": args.reps,
        "seed": args.seed,
        "N_grid": list(args.N_grid),
        "T_grid": list(args.T_grid),
        "summaries": summaries,
    }
    _write_json(meta, os.path.join(out, "study.json"))
    _emit(os.path.join(out, "study.json"))
    if args.figures:
        if args.study == "detection":
            from .report import save_detection_bars

            _emit(
                save_detection_bars(
                    results, args.r, os.path.join(out, "detection.png")
                )
            )
        else:
            from .report import save_study_boxplots

            for N in sorted({N for N, _ in cells}):
                by_T = {
                    T: [{"loading_dist": v} for v in results[(N, T)]]
                    for (cell_N, T) in cells
                    if cell_N == N
                }
                _emit(
                    save_study_boxplots(
                        by_T, ["loading_dist"],
                        os.path.join(out, f"loading_N{N}.png"),
                        title=f"N = {N}",
                    )
                )


def cmd_eval(args) -> int:
    if args.reps < 1:
        raise InvalidArgument(f"--reps must be >= 1, got {args.reps}")
    jobs = _resolve_jobs(args)
    os.makedirs(args.out, exist_ok=True)
    if args.study in ("rrsra", "irra"):
        _eval_fit_study(args, args.out, jobs)
    else:
        _eval_panel_study(args, args.out, jobs)
    return 0


def _add_center(parser) -> None:
    parser.add_argument("--center", action="store_true",
                        help="subtract column means from the loaded panels")


def _add_detector_flags(parser) -> None:
    parser.add_argument("--k-bar", type=int, default=10,
                        help="autocorrelation lags in the unit-root screen")
    parser.add_argument("--delta0", type=float, default=0.3,
                        help="unit-root screen threshold")


def _add_solver_flags(parser) -> None:
    parser.add_argument("--outer-tol", type=float, default=1e-6,
                        help="relative change ending the alternating loop")
    parser.add_argument("--max-outer", type=int, default=500,
                        help="cap on alternating sweeps")


def _add_jobs(parser) -> None:
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker processes (default: EFFRANK_JOBS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="effrank",
        description="Cointegration-rank regression toolkit: simulate, fit, "
                    "tune, forecast, and evaluate over CSV panels.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    ps = sub.add_parser("simulate", help="draw one synthetic dataset")
    ps.add_argument("--dgp", choices=("rrsra", "irra"), default="rrsra")
    ps.add_argument("--p", type=int, required=True, help="target series count")
    ps.add_argument("--N", type=int, required=True, help="observed series count")
    ps.add_argument("--r", type=int, default=3, help="number of common trends")
    ps.add_argument("--T", type=int, required=True, help="sample length")
    ps.add_argument("--seed", type=int, required=True)
    ps.add_argument("--out", default=".", help="output directory")
    ps.set_defaults(func=cmd_simulate)

    pf = sub.add_parser("fit", help="two-step fit on a panel pair")
    pf.add_argument("--x", required=True, help="observed panel CSV")
    pf.add_argument("--y", required=True, help="target panel CSV")
    pf.add_argument("--method", choices=("rrsra", "irra"), default="rrsra")
    pf.add_argument("--lambda-A", type=float, default=None,
                    help="nuclear penalty (default: sqrt((p+N)/T))")
    pf.add_argument("--lambda-Phi", type=float, default=None,
                    help="lag-block penalty (default: sqrt(log p/T), or 1 for irra)")
    pf.add_argument("--d", type=int, default=1, help="lag order")
    pf.add_argument("--r", type=int, default=None,
                    help="trend count (default: detected)")
    pf.add_argument("--rel-tol", type=float, default=1e-2,
                    help="relative threshold of the effective-rank report")
    pf.add_argument("--jacobi", action="store_true",
                    help="update irra blocks from the previous sweep")
    _add_center(pf)
    _add_detector_flags(pf)
    _add_solver_flags(pf)
    pf.add_argument("--out", default=".", help="output directory")
    pf.set_defaults(func=cmd_fit)

    pt = sub.add_parser("tune", help="expanding-window penalty selection")
    pt.add_argument("--x", required=True)
    pt.add_argument("--y", required=True)
    pt.add_argument("--T1", type=int, required=True,
                    help="first forecast origin of the tuning windows")
    pt.add_argument("--method", choices=("rrsra", "irra"), default="rrsra")
    pt.add_argument("--lambda-A-grid", type=_float_list, default=None,
                    help="comma-separated candidates (default: rate-based)")
    pt.add_argument("--lambda-Phi-grid", type=_float_list, default=None)
    pt.add_argument("--d-grid", type=_int_list, default=None,
                    help="comma-separated lag orders (default: 1,2,3)")
    pt.add_argument("--r", type=int, default=None)
    pt.add_argument("--freeze-r", action="store_true",
                    help="detect the trend count once at the first window")
    pt.add_argument("--figures", action="store_true",
                    help="render a forecast-error heat map")
    _add_center(pt)
    _add_detector_flags(pt)
    _add_solver_flags(pt)
    _add_jobs(pt)
    pt.add_argument("--out", default=".", help="output directory")
    pt.set_defaults(func=cmd_tune)

    pc = sub.add_parser("forecast", help="one-step forecasts over a split")
    pc.add_argument("--x", required=True)
    pc.add_argument("--y", required=True)
    pc.add_argument("--fit", default=None,
                    help="fit.json to apply as-is (skips refitting)")
    pc.add_argument("--split", type=int, default=None,
                    help="first forecast origin")
    pc.add_argument("--method", choices=("rrsra", "irra", "var", "rw"),
                    default="rrsra")
    pc.add_argument("--lambda-A", type=float, default=None)
    pc.add_argument("--lambda-Phi", type=float, default=None)
    pc.add_argument("--d", type=int, default=1)
    pc.add_argument("--r", type=int, default=None)
    pc.add_argument("--freeze-r", action="store_true")
    pc.add_argument("--auto-tune", action="store_true",
                    help="select penalties inside the training segment")
    pc.add_argument("--lambda-A-grid", type=_float_list, default=None)
    pc.add_argument("--lambda-Phi-grid", type=_float_list, default=None)
    pc.add_argument("--d-grid", type=_int_list, default=None)
    pc.add_argument("--tune-windows", type=int, default=10,
                    help="tuning origins inside the training segment")
    pc.add_argument("--retune-per-origin", action="store_true",
                    help="repeat tuning at every forecast origin")
    pc.add_argument("--figures", action="store_true",
                    help="render the out-of-sample R2 path")
    _add_center(pc)
    _add_detector_flags(pc)
    _add_solver_flags(pc)
    _add_jobs(pc)
    pc.add_argument("--out", default=".", help="output directory")
    pc.set_defaults(func=cmd_forecast)

    pe = sub.add_parser("eval", help="Monte Carlo replication studies")
    pe.add_argument("--study", choices=("rrsra", "irra", "detection", "loading"),
                    required=True)
    pe.add_argument("--p", type=int, default=20)
    pe.add_argument("--N", type=int, default=20,
                    help="observed series count (rrsra/irra studies)")
    pe.add_argument("--N-grid", type=_int_list, default=(20, 40, 60),
                    help="N values (detection/loading studies)")
    pe.add_argument("--T-grid", type=_int_list, default=(400, 800, 1200))
    pe.add_argument("--reps", type=int, required=True)
    pe.add_argument("--seed", type=int, required=True)
    pe.add_argument("--r", type=int, default=3)
    pe.add_argument("--d", type=int, default=None,
                    help="fitted lag order (default: the scenario's)")
    pe.add_argument("--scale-A", type=float, default=1.0,
                    help="multiplier on the lambda_A rate")
    pe.add_argument("--scale-Phi", type=float, default=1.0,
                    help="multiplier on the lambda_Phi rate (rrsra study)")
    pe.add_argument("--lambda-Phi", type=float, default=1.0,
                    help="weight multiplier (irra study)")
    pe.add_argument("--rel-tol", type=float, default=1e-2)
    pe.add_argument("--figures", action="store_true",
                    help="render study figures")
    _add_detector_flags(pe)
    _add_solver_flags(pe)
    _add_jobs(pe)
    pe.add_argument("--out", default=".", help="output directory")
    pe.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code is None else int(exc.code)
    try:
        return int(args.func(args) or 0)
    except (ParseError, EmptyInput, InvalidArgument) as exc:
        print(f"effrank: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"effrank: error: {exc}", file=sys.stderr)
        return 2
    except EffrankError as exc:
        print(f"effrank: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
