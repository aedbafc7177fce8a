"""Alternating solver with a separate nuclear penalty on every lag block.

Same regression as the l1 variant, y_t = A z_{t-1} + sum_i Phi_i y_{t-i} + e_t,
but each p x p lag coefficient Phi_i is pushed toward low rank instead of
sparsity:

    (1/2T) sum_t ||y_t - A z_{t-1} - sum_i Phi_i y_{t-i}||^2
        + lambda_A ||A||_*  +  lambda_Phi sum_i w_i ||Phi_i||_*

The default weights w_i = sigma_1(Y) (sqrt(p) + sqrt(rank Y)) / T put
lambda_Phi on a scale-free footing, so lambda_Phi = 1 is a sensible
starting point.

Blocks are visited A, Phi_1, ..., Phi_d. By default each update sees the
freshest values of the others (Gauss-Seidel), which keeps the objective
trace non-increasing; ``jacobi=True`` updates every block from the previous
sweep instead, which parallelizes conceptually but loses that guarantee, so
the monotonicity sentinel is only armed in the default mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, InternalError, InvalidArgument
from .regularizers import ProxConfig, svt
from .rrsra import _as_matrix, _block_moved, _lag_matrix, _prox_gradient_block

_MONOTONE_SLACK = 1e-8


@dataclass(frozen=True)
class IrraFit:
    """Solution of the per-lag low-rank alternating minimization."""

    A_hat: np.ndarray
    Phi_hats: tuple[np.ndarray, ...]
    lambda_A: float
    lambda_Phi: float
    weights: tuple[float, ...]
    d: int
    objective_trace: tuple[float, ...]
    iterations: int
    converged: bool

    @property
    def p(self) -> int:
        return self.A_hat.shape[0]

    @property
    def Phi_stacked(self) -> np.ndarray:
        """The lag blocks side by side, p x (d*p)."""
        if not self.Phi_hats:
            return np.zeros((self.A_hat.shape[0], 0))
        return np.hstack(self.Phi_hats)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "method": "irra",
            "A_hat": self.A_hat.tolist(),
            "Phi_hats": [Phi.tolist() for Phi in self.Phi_hats],
            "lambda_A": float(self.lambda_A),
            "lambda_Phi": float(self.lambda_Phi),
            "weights": [float(w) for w in self.weights],
            "d": int(self.d),
            "objective_trace": [float(v) for v in self.objective_trace],
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "IrraFit":
        A = np.asarray(obj["A_hat"], dtype=float)
        if A.ndim == 1:
            A = A.reshape(len(A), 0)
        return cls(
            A_hat=A,
            Phi_hats=tuple(np.asarray(Phi, dtype=float) for Phi in obj["Phi_hats"]),
            lambda_A=float(obj["lambda_A"]),
            lambda_Phi=float(obj["lambda_Phi"]),
            weights=tuple(float(w) for w in obj["weights"]),
            d=int(obj["d"]),
            objective_trace=tuple(obj["objective_trace"]),
            iterations=int(obj["iterations"]),
            converged=bool(obj["converged"]),
        )


def default_weights(Y, d: int) -> tuple[float, ...]:
    """Per-lag penalty weights sigma_1(Y) (sqrt(p) + sqrt(rank Y)) / T.

    All d weights are equal; the lag index only labels them. rank Y counts
    singular values above 1e-10 * sigma_1(Y).

    Raises
    ------
    DegenerateInput
        If Y is identically zero, which leaves no scale to calibrate on.
    """
    Y = _as_matrix(Y, "Y")
    if int(d) != d or d < 0:
        raise InvalidArgument(f"lag order must be a nonnegative integer, got {d}")
    p, T = Y.shape
    if T < 1:
        raise InvalidArgument("Y must have at least one period")
    sv = np.linalg.svd(Y, compute_uv=False)
    sigma1 = float(sv[0]) if sv.size else 0.0
    if sigma1 <= 0.0:
        raise DegenerateInput("Y is identically zero; weights are undefined")
    rank = int(np.sum(sv > 1e-10 * sigma1))
    w = sigma1 * (np.sqrt(p) + np.sqrt(rank)) / T
    return tuple(float(w) for _ in range(int(d)))


def irra_objective(Y, Z_hat, A, Phis, lambda_A: float, lambda_Phi: float,
                   weights) -> float:
    """Evaluate the weighted multi-block nuclear objective at (A, Phis)."""
    Y = _as_matrix(Y, "Y")
    Z_hat = _as_matrix(Z_hat, "Z_hat")
    A = _as_matrix(A, "A")
    Phis = [_as_matrix(Phi, f"Phi_{i + 1}") for i, Phi in enumerate(Phis)]
    weights = [float(w) for w in weights]
    if Y.shape[1] != Z_hat.shape[1]:
        raise InvalidArgument(
            f"Y has {Y.shape[1]} periods but Z_hat has {Z_hat.shape[1]}"
        )
    p, T = Y.shape
    if A.shape != (p, Z_hat.shape[0]):
        raise InvalidArgument(f"A has shape {A.shape}, expected {(p, Z_hat.shape[0])}")
    if len(weights) != len(Phis):
        raise InvalidArgument(f"{len(Phis)} lag blocks but {len(weights)} weights")
    for i, Phi in enumerate(Phis):
        if Phi.shape != (p, p):
            raise InvalidArgument(f"Phi_{i + 1} has shape {Phi.shape}, expected {(p, p)}")
    if lambda_A < 0 or lambda_Phi < 0 or any(w < 0 for w in weights):
        raise InvalidArgument("penalty weights must be nonnegative")
    residual = Y.copy()
    if A.size:
        residual -= A @ Z_hat
    for i, Phi in enumerate(Phis, start=1):
        residual -= Phi @ _lag_matrix(Y, i)
    value = 0.5 / T * float(np.sum(residual**2))
    if A.size:
        value += lambda_A * float(np.sum(np.linalg.svd(A, compute_uv=False)))
    for w, Phi in zip(weights, Phis):
        value += lambda_Phi * w * float(np.sum(np.linalg.svd(Phi, compute_uv=False)))
    return value


def fit_irra(Y, Z_hat, d: int, lambda_A: float, lambda_Phi: float,
             weights=None, outer_tol: float = 1e-6, max_outer: int = 500,
             cfg: ProxConfig | None = None, jacobi: bool = False) -> IrraFit:
    """Alternate exact block minimizations, nuclear penalty on every block.

    Starts from A = 0, Phi_i = 0. ``weights`` defaults to
    default_weights(Y, d). With ``jacobi=True`` all block updates in a sweep
    use the previous sweep's values; the default sweeps in place.

    Raises
    ------
    InternalError
        In the default mode only, if the objective rises by more than 1e-8
        between sweeps.
    """
    cfg = cfg or ProxConfig()
    Y = _as_matrix(Y, "Y")
    Z_hat = _as_matrix(Z_hat, "Z_hat")
    if Y.shape[1] != Z_hat.shape[1]:
        raise InvalidArgument(
            f"Y has {Y.shape[1]} periods but Z_hat has {Z_hat.shape[1]}"
        )
    if int(d) != d or d < 1:
        raise InvalidArgument(f"lag order must be a positive integer, got {d}")
    if lambda_A < 0 or lambda_Phi < 0:
        raise InvalidArgument("penalty weights must be nonnegative")
    if max_outer < 1:
        raise InvalidArgument(f"max_outer must be >= 1, got {max_outer}")
    d = int(d)
    p, T = Y.shape
    m = Z_hat.shape[0]
    if weights is None:
        weights = default_weights(Y, d)
    weights = tuple(float(w) for w in weights)
    if len(weights) != d:
        raise InvalidArgument(f"expected {d} weights, got {len(weights)}")
    if any(w <= 0 for w in weights):
        raise InvalidArgument("weights must be positive")

    lags = [_lag_matrix(Y, i) for i in range(1, d + 1)]
    gram_Z = Z_hat @ Z_hat.T / T
    gram_lags = [P_i @ P_i.T / T for P_i in lags]
    prox_A = lambda point, step: svt(point, step * lambda_A)

    A = np.zeros((p, m))
    Phis = [np.zeros((p, p)) for _ in range(d)]
    trace = [irra_objective(Y, Z_hat, A, Phis, lambda_A, lambda_Phi, weights)]
    converged = False
    iterations = 0
    for k in range(1, max_outer + 1):
        A_prev = A
        Phis_prev = list(Phis)
        if jacobi:
            base = Y - A_prev @ Z_hat if A_prev.size else Y.copy()
            for Phi, P_i in zip(Phis_prev, lags):
                base -= Phi @ P_i
            # base = residual with every previous-sweep block removed
            A = _prox_gradient_block(
                gram_Z, (base + A_prev @ Z_hat if A_prev.size else base) @ Z_hat.T / T,
                A_prev, prox_A, cfg)
            for i in range(d):
                partial = base + Phis_prev[i] @ lags[i]
                thresh = lambda point, step, w=weights[i]: svt(point, step * lambda_Phi * w)
                Phis[i] = _prox_gradient_block(
                    gram_lags[i], partial @ lags[i].T / T, Phis_prev[i], thresh, cfg)
        else:
            residual = Y.copy()
            for Phi, P_i in zip(Phis, lags):
                residual -= Phi @ P_i
            A = _prox_gradient_block(gram_Z, residual @ Z_hat.T / T, A_prev, prox_A, cfg)
            if A.size:
                residual -= A @ Z_hat
            # residual now excludes every current block; add one back to get
            # that block's partial residual, subtract its update after.
            for i in range(d):
                partial = residual + Phis[i] @ lags[i]
                thresh = lambda point, step, w=weights[i]: svt(point, step * lambda_Phi * w)
                Phis[i] = _prox_gradient_block(
                    gram_lags[i], partial @ lags[i].T / T, Phis[i], thresh, cfg)
                residual = partial - Phis[i] @ lags[i]
        objective = irra_objective(Y, Z_hat, A, Phis, lambda_A, lambda_Phi, weights)
        if not jacobi and objective > trace[-1] + _MONOTONE_SLACK:
            raise InternalError(
                f"objective increased from {trace[-1]!r} to {objective!r} at sweep {k}"
            )
        trace.append(objective)
        iterations = k
        moved = _block_moved(A, A_prev, outer_tol) or any(
            _block_moved(Phis[i], Phis_prev[i], outer_tol) for i in range(d)
        )
        if not moved:
            converged = True
            break
    return IrraFit(
        A_hat=A,
        Phi_hats=tuple(Phis),
        lambda_A=float(lambda_A),
        lambda_Phi=float(lambda_Phi),
        weights=weights,
        d=d,
        objective_trace=tuple(trace),
        iterations=iterations,
        converged=converged,
    )
