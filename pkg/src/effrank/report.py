"""Figure rendering for simulation studies, tuning tables, and forecasts.

All functions draw to files with the non-interactive Agg backend, so they
work in headless environments; each returns the path it wrote. The CLI
calls these when asked for figures next to its delimited outputs, and they
are equally usable from a notebook or script.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import InvalidArgument


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return os.fspath(path)


def save_study_boxplots(records_by_T: dict, metrics, path, title: str | None = None):
    """Box plots of per-replication metrics against sample size.

    ``records_by_T`` maps T to a list of per-replication record dicts (the
    study drivers' output); ``metrics`` names the record keys to plot, one
    panel per key.
    """
    metrics = list(metrics)
    if not metrics:
        raise InvalidArgument("need at least one metric name")
    T_values = sorted(records_by_T)
    if not T_values:
        raise InvalidArgument("records_by_T is empty")
    fig, axes = plt.subplots(
        1, len(metrics), figsize=(4.2 * len(metrics), 3.6), squeeze=False
    )
    for ax, metric in zip(axes[0], metrics):
        data = []
        for T in T_values:
            rows = records_by_T[T]
            if not rows or metric not in rows[0]:
                raise InvalidArgument(f"metric {metric!r} missing from records")
            data.append([float(rec[metric]) for rec in rows])
        ax.boxplot(data, tick_labels=[str(T) for T in T_values])
        ax.set_xlabel("T")
        ax.set_title(metric)
        ax.grid(True, axis="y", alpha=0.3)
    if title:
        fig.suptitle(title)
    return _finish(fig, path)


def save_forecast_paths(report, path):
    """Per-origin out-of-sample R^2 and its running mean across origins."""
    values = np.asarray(report.per_origin_r2, dtype=float)
    if values.size == 0:
        raise InvalidArgument("report has no origins")
    origins = report.split_index + 1 + np.arange(values.size)
    running = np.cumsum(values) / np.arange(1, values.size + 1)
    fig, ax = plt.subplots(figsize=(7.0, 3.6))
    ax.plot(origins, values, marker="o", markersize=3, linewidth=1.0,
            label="per-origin")
    ax.plot(origins, running, linewidth=1.8, label="running mean")
    ax.axhline(0.0, color="gray", linewidth=0.8)
    ax.set_xlabel("predicted period")
    ax.set_ylabel("out-of-sample R2")
    ax.set_title(f"{report.method}, split at {report.split_index}")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def save_tuning_heatmap(result, path):
    """Forecast-error heat maps over the penalty grid, one panel per lag order."""
    lam_a = sorted({g.lambda_A for g in result.scores})
    lam_p = sorted({g.lambda_Phi for g in result.scores})
    ds = sorted({g.d for g in result.scores})
    fig, axes = plt.subplots(
        1, len(ds), figsize=(4.4 * len(ds), 3.8), squeeze=False
    )
    table = {(g.d, g.lambda_A, g.lambda_Phi): g.forecast_error for g in result.scores}
    for ax, d in zip(axes[0], ds):
        grid = np.full((len(lam_a), len(lam_p)), np.nan)
        for i, a in enumerate(lam_a):
            for j, b in enumerate(lam_p):
                if (d, a, b) in table:
                    grid[i, j] = table[(d, a, b)]
        image = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
        ax.set_xticks(range(len(lam_p)), [f"{v:.3g}" for v in lam_p], rotation=45)
        ax.set_yticks(range(len(lam_a)), [f"{v:.3g}" for v in lam_a])
        ax.set_xlabel("lambda_Phi")
        ax.set_ylabel("lambda_A")
        ax.set_title(f"d = {d}")
        if d == result.d:
            i = lam_a.index(result.lambda_A)
            j = lam_p.index(result.lambda_Phi)
            ax.plot(j, i, marker="*", color="red", markersize=12)
        fig.colorbar(image, ax=ax, shrink=0.85)
    fig.suptitle(f"forecast error, T1 = {result.T1} ({result.method})")
    return _finish(fig, path)


def save_detection_bars(results: dict, r: int, path):
    """Correct-detection frequency per (N, T) cell of a detection study."""
    if not results:
        raise InvalidArgument("results are empty")
    cells = sorted(results)
    fractions = [
        float(np.mean([hat == r for hat in results[cell]])) for cell in cells
    ]
    labels = [f"N={N}\nT={T}" for N, T in cells]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * len(cells)), 3.6))
    ax.bar(range(len(cells)), fractions, color="steelblue")
    ax.set_xticks(range(len(cells)), labels, fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.axhline(1.0, color="gray", linewidth=0.8, linestyle="--")
    ax.set_ylabel(f"fraction with r_hat = {r}")
    ax.set_title("trend-count detection")
    ax.grid(True, axis="y", alpha=0.3)
    return _finish(fig, path)
