"""Step 1 of the two-step procedure: PCA loadings, trend detection, proxies.

An observed N-dimensional panel x_t is assumed to be driven by r unit-root
common factors through an orthonormal loading matrix B. The leading r
eigenvectors of the Gram matrix X X' estimate B; the trailing N - r
eigenvectors span the cointegrating directions B_c, and z_hat_t = B_c' x_t
is the stationary proxy series fed to the regression step.

The number of trends r is detected from the principal components in
descending-eigenvalue order: component j is flagged as unit-root when the
average absolute sample autocorrelation over lags 1..k_bar is at least
delta0, and the scan stops at the first component that fails.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeries, EmptyResult, InvalidArgument
from .panel import Panel


@dataclass(frozen=True)
class TrendDetectorConfig:
    """Settings for the unit-root screen.

    Parameters
    ----------
    k_bar : int
        Maximum autocorrelation lag (default 10).
    delta0 : float
        Decision threshold in (0, 1) on S_j(k_bar)/k_bar (default 0.3).
    """

    k_bar: int = 10
    delta0: float = 0.3

    def __post_init__(self):
        if int(self.k_bar) != self.k_bar or self.k_bar < 1:
            raise InvalidArgument(f"k_bar must be a positive integer, got {self.k_bar}")
        if not 0 < self.delta0 < 1:
            raise InvalidArgument(f"delta0 must lie in (0, 1), got {self.delta0}")


@dataclass(frozen=True)
class FactorFit:
    """Loadings and factor paths from the PCA step.

    Attributes
    ----------
    B_hat : ndarray
        N x r orthonormal loading estimate (leading eigenvectors of XX').
    Bc_hat : ndarray
        N x (N - r) orthonormal complement (trailing eigenvectors).
    r_hat : int
        Number of common trends used for the split.
    eigenvalues : ndarray
        All N eigenvalues of XX', descending.
    F_hat : ndarray
        r x T factor paths, F_hat = B_hat' X.
    """

    B_hat: np.ndarray
    Bc_hat: np.ndarray
    r_hat: int
    eigenvalues: np.ndarray
    F_hat: np.ndarray

    @property
    def n_series(self) -> int:
        return self.B_hat.shape[0]

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "r_hat": int(self.r_hat),
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "B_hat": self.B_hat.tolist(),
            "Bc_hat": self.Bc_hat.tolist(),
        }

    @classmethod
    def from_json_dict(cls, obj: dict, F_hat: np.ndarray | None = None) -> "FactorFit":
        B = np.asarray(obj["B_hat"], dtype=float)
        Bc = np.asarray(obj["Bc_hat"], dtype=float)
        if F_hat is None:
            F_hat = np.zeros((B.shape[1], 0))
        return cls(
            B_hat=B,
            Bc_hat=Bc,
            r_hat=int(obj["r_hat"]),
            eigenvalues=np.asarray(obj["eigenvalues"], dtype=float),
            F_hat=np.asarray(F_hat, dtype=float),
        )


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive.

    Eigenvector signs are arbitrary; fixing them makes outputs reproducible
    across runs and platforms.
    """
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _gram_eigh(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of XX' (N x N), eigenvalues descending, signs fixed."""
    gram = X @ X.T
    eigenvalues, vectors = np.linalg.eigh(gram)
    order = np.argsort(eigenvalues)[::-1]
    return eigenvalues[order], _fix_signs(vectors[:, order])


def estimate_loadings(x: Panel, r: int) -> FactorFit:
    """Split the eigenbasis of XX' into r trend loadings and their complement.

    Parameters
    ----------
    x : Panel
        T x N observed panel (rows = time).
    r : int
        Number of common trends, 0 <= r <= N. The leading r eigenvectors
        (by eigenvalue) become B_hat; the rest become Bc_hat.

    Returns
    -------
    FactorFit
        With F_hat = B_hat' X and all N eigenvalues, descending.
    """
    N = x.n_series
    if int(r) != r or not 0 <= r <= N:
        raise InvalidArgument(f"r must be an integer in [0, {N}], got {r}")
    if x.n_periods < 2:
        raise InvalidArgument(f"need at least 2 time points, got {x.n_periods}")
    r = int(r)
    X = x.values.T
    eigenvalues, vectors = _gram_eigh(X)
    B_hat = vectors[:, :r]
    Bc_hat = vectors[:, r:]
    return FactorFit(
        B_hat=B_hat,
        Bc_hat=Bc_hat,
        r_hat=r,
        eigenvalues=eigenvalues,
        F_hat=B_hat.T @ X,
    )


def acf_abs_sum(series: np.ndarray, k_bar: int) -> float:
    """Sum of absolute sample autocorrelations over lags 1..k_bar.

    Uses the standard biased estimator: rho_hat(k) has denominator
    sum_t (v_t - v_bar)^2 over the full series.

    Raises
    ------
    InvalidArgument
        If the series is shorter than k_bar + 1.
    DegenerateSeries
        If the series is constant (zero variance).
    """
    if int(k_bar) != k_bar or k_bar < 1:
        raise InvalidArgument(f"k_bar must be a positive integer, got {k_bar}")
    v = np.asarray(series, dtype=float).ravel()
    T = v.size
    if T <= k_bar:
        raise InvalidArgument(f"series length {T} must exceed k_bar={k_bar}")
    centered = v - v.mean()
    denom = float(centered @ centered)
    if denom == 0.0:
        raise DegenerateSeries("series is constant; autocorrelation undefined")
    total = 0.0
    for k in range(1, int(k_bar) + 1):
        total += abs(float(centered[k:] @ centered[:-k])) / denom
    return total


def detect_num_trends(x: Panel, cfg: TrendDetectorConfig | None = None) -> int:
    """Count the leading unit-root principal components of x.

    Principal components are scanned in descending-eigenvalue order; the
    count stops at the first component j whose S_j(k_bar)/k_bar falls below
    delta0 (a constant component counts as stationary). Returns N when every
    component passes.
    """
    cfg = cfg or TrendDetectorConfig()
    if x.n_periods <= cfg.k_bar + 1:
        raise InvalidArgument(
            f"need T > k_bar + 1 = {cfg.k_bar + 1}, got T = {x.n_periods}"
        )
    X = x.values.T
    _, vectors = _gram_eigh(X)
    count = 0
    for j in range(x.n_series):
        component = vectors[:, j] @ X
        try:
            stat = acf_abs_sum(component, cfg.k_bar) / cfg.k_bar
        except DegenerateSeries:
            break
        if stat >= cfg.delta0:
            count += 1
        else:
            break
    return count


def cointegrated_series(x: Panel, fit: FactorFit) -> Panel:
    """Project the panel onto the cointegrating directions: z_hat_t = Bc_hat' x_t.

    Returns a T x (N - r_hat) panel named z0..z{N-r-1}.

    Raises
    ------
    InvalidArgument
        If the fit's dimension does not match the panel.
    EmptyResult
        If r_hat = N, in which case no cointegrating direction exists.
    """
    if fit.n_series != x.n_series:
        raise InvalidArgument(
            f"fit is for {fit.n_series} series, panel has {x.n_series}"
        )
    m = fit.Bc_hat.shape[1]
    if m == 0:
        raise EmptyResult("r_hat = N: no cointegrating directions to project on")
    values = x.values @ fit.Bc_hat
    return Panel(values, tuple(f"z{j}" for j in range(m)), x.start_index)


def factor_recovery_rmse(truth_B: np.ndarray, truth_F: np.ndarray, fit: FactorFit) -> float:
    """Root mean squared error of the common component, ((1/NT) sum_t ||B f_t - B_hat f_hat_t||^2)^(1/2).

    Invariant to any orthogonal rotation shared by loadings and factors,
    since only the product B f_t enters.
    """
    truth_B = np.asarray(truth_B, dtype=float)
    truth_F = np.asarray(truth_F, dtype=float)
    if truth_B.ndim != 2 or truth_F.ndim != 2 or truth_B.shape[1] != truth_F.shape[0]:
        raise InvalidArgument("loadings and factor paths are not conformable")
    if truth_B.shape[0] != fit.B_hat.shape[0]:
        raise InvalidArgument(
            f"truth has {truth_B.shape[0]} series, fit has {fit.B_hat.shape[0]}"
        )
    if truth_F.shape[1] != fit.F_hat.shape[1]:
        raise InvalidArgument(
            f"truth has {truth_F.shape[1]} periods, fit has {fit.F_hat.shape[1]}"
        )
    diff = truth_B @ truth_F - fit.B_hat @ fit.F_hat
    return float(np.sqrt(np.mean(diff**2)))
