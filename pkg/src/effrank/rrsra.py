"""Alternating solver for the nuclear-norm + l1 penalized regression.

The model is y_t = A z_{t-1} + Phi P_{t-1} + e_t, estimated by minimizing

    (1/2T) sum_t ||y_t - A z_{t-1} - Phi P_{t-1}||^2
        + lambda_A ||A||_*  +  lambda_Phi ||vec(Phi)||_1

over A (p x m) and the stacked lag block Phi (p x d*p). Matrices are stored
columns-as-time: Y is p x T and Z_hat is the *aligned* design whose column t
is z_hat_{t-1} (first column zero), so the two inputs line up index by index.

Each block is minimized exactly (proximal gradient run to tolerance) while
the other is held fixed, starting from Phi = 0; exact block minimization is
what makes the objective trace non-increasing, which fit_rrsra enforces as
an internal consistency check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyResult, InternalError, InvalidArgument, NumericalFailure
from .regularizers import ProxConfig, soft_threshold, svt

_MONOTONE_SLACK = 1e-8


@dataclass(frozen=True)
class RrsraFit:
    """Solution of the alternating minimization.

    Attributes
    ----------
    A_hat : ndarray
        p x m coefficient of the lagged stationary proxies.
    Phi_hat : ndarray
        p x (d*p) stacked lag coefficients (p x 0 when d = 0).
    objective_trace : tuple of float
        Objective value before the first sweep and after each outer
        iteration; non-increasing within 1e-8.
    iterations : int
        Number of outer iterations performed.
    converged : bool
        True when the outer loop stopped on the tolerance, not the cap.
    """

    A_hat: np.ndarray
    Phi_hat: np.ndarray
    lambda_A: float
    lambda_Phi: float
    d: int
    objective_trace: tuple[float, ...]
    iterations: int
    converged: bool

    @property
    def p(self) -> int:
        return self.A_hat.shape[0]

    def phi_block(self, i: int) -> np.ndarray:
        """Lag-i coefficient matrix (1-based), a p x p slice of Phi_hat."""
        if not 1 <= i <= self.d:
            raise InvalidArgument(f"lag index {i} outside 1..{self.d}")
        return self.Phi_hat[:, (i - 1) * self.p : i * self.p]

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "method": "rrsra",
            "A_hat": self.A_hat.tolist(),
            "Phi_hat": self.Phi_hat.tolist(),
            "lambda_A": float(self.lambda_A),
            "lambda_Phi": float(self.lambda_Phi),
            "d": int(self.d),
            "objective_trace": [float(v) for v in self.objective_trace],
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "RrsraFit":
        A = np.asarray(obj["A_hat"], dtype=float)
        if A.ndim == 1:
            A = A.reshape(len(A), 0)
        Phi = np.asarray(obj["Phi_hat"], dtype=float)
        if Phi.ndim == 1:
            Phi = Phi.reshape(len(Phi), 0)
        return cls(
            A_hat=A,
            Phi_hat=Phi,
            lambda_A=float(obj["lambda_A"]),
            lambda_Phi=float(obj["lambda_Phi"]),
            d=int(obj["d"]),
            objective_trace=tuple(obj["objective_trace"]),
            iterations=int(obj["iterations"]),
            converged=bool(obj["converged"]),
        )


@dataclass(frozen=True)
class EffectiveRankReport:
    """Recovered rank of A_hat and support of Phi_hat."""

    rank_A: int
    singular_values: tuple[float, ...]
    support_Phi: tuple[tuple[int, int], ...]
    cardinality: int


def _as_matrix(M, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise InvalidArgument(f"{name} must be 2-D, got ndim={M.ndim}")
    return M


def _lag_matrix(M: np.ndarray, i: int) -> np.ndarray:
    """Shift columns right by i periods, zero-filling the first i columns."""
    out = np.zeros_like(M)
    if i < M.shape[1]:
        out[:, i:] = M[:, : M.shape[1] - i]
    return out

def _lag_design(Y: np.ndarray, d: int) -> np.ndarray:
    """Stack the d lagged copies of Y into the (d*p) x T design P."""
    if d == 0:
        return np.zeros((0, Y.shape[1]))
    return np.vstack([_lag_matrix(Y, i) for i in range(1, d + 1)])


def _prox_gradient_block(gram, cross, start, make_prox_arg, cfg):
    """Minimize (1/2T)||R - W D||_F^2 + pen(W) by proximal gradient.

    Parameters are the right Gram matrix G = D D'/T, the cross moment
    C = R D'/T, a warm start, and a prox callback applied as
    make_prox_arg(point, step). The gradient of the smooth part at W is
    W G - C, and the exact Lipschitz constant is lambda_max(G).
    """
    if gram.shape[0] == 0 or start.shape[0] == 0:
        return start.copy()
    lip = float(np.linalg.eigvalsh(gram)[-1])
    if lip <= 0.0:
        # Zero design: the smooth part is constant, so the penalized
        # minimizer is the zero matrix.
        return np.zeros_like(start)
    step = cfg.step_scale / lip
    W = start
    for _ in range(cfg.max_inner_iter):
        W_next = make_prox_arg(W - step * (W @ gram - cross), step)
        if not np.all(np.isfinite(W_next)):
            raise NumericalFailure("non-finite iterate in a block solve")
        delta = float(np.linalg.norm(W_next - W))
        W = W_next
        if delta <= cfg.inner_tol * max(1.0, float(np.linalg.norm(W))):
            break
    return W


def _check_aligned(Y, Z_hat, P) -> None:
    T = Y.shape[1]
    if Z_hat.shape[1] != T or P.shape[1] != T:
        raise InvalidArgument(
            f"time dimensions differ: Y has {T}, Z_hat {Z_hat.shape[1]}, P {P.shape[1]}"
        )


def rrsra_objective(Y, Z_hat, P, A, Phi, lambda_A: float, lambda_Phi: float) -> float:
    """Evaluate the penalized objective at (A, Phi)."""
    Y = _as_matrix(Y, "Y")
    Z_hat = _as_matrix(Z_hat, "Z_hat")
    P = _as_matrix(P, "P")
    A = _as_matrix(A, "A")
    Phi = _as_matrix(Phi, "Phi")
    _check_aligned(Y, Z_hat, P)
    if A.shape != (Y.shape[0], Z_hat.shape[0]):
        raise InvalidArgument(f"A has shape {A.shape}, expected {(Y.shape[0], Z_hat.shape[0])}")
    if Phi.shape != (Y.shape[0], P.shape[0]):
        raise InvalidArgument(f"Phi has shape {Phi.shape}, expected {(Y.shape[0], P.shape[0])}")
    if lambda_A < 0 or lambda_Phi < 0:
        raise InvalidArgument("penalty weights must be nonnegative")
    T = Y.shape[1]
    residual = Y.copy()
    if A.size:
        residual -= A @ Z_hat
    if Phi.size:
        residual -= Phi @ P
    value = 0.5 / T * float(np.sum(residual**2))
    if A.size:
        value += lambda_A * float(np.sum(np.linalg.svd(A, compute_uv=False)))
    if Phi.size:
        value += lambda_Phi * float(np.sum(np.abs(Phi)))
    return value


def a_step(Y, Z_hat, P, Phi_fixed, lambda_A: float, cfg: ProxConfig | None = None,
           start: np.ndarray | None = None) -> np.ndarray:
    """Minimize over A with Phi held fixed (nuclear-norm proximal gradient).

    Solves (1/2T)||R - A Z_hat||_F^2 + lambda_A ||A||_* with
    R = Y - Phi_fixed P. ``start`` warm-starts the iteration (zeros by
    default).
    """
    cfg = cfg or ProxConfig()
    Y = _as_matrix(Y, "Y")
    Z_hat = _as_matrix(Z_hat, "Z_hat")
    P = _as_matrix(P, "P")
    Phi_fixed = _as_matrix(Phi_fixed, "Phi_fixed")
    _check_aligned(Y, Z_hat, P)
    if lambda_A < 0:
        raise InvalidArgument(f"lambda_A must be nonnegative, got {lambda_A}")
    p, T = Y.shape
    m = Z_hat.shape[0]
    residual = Y - Phi_fixed @ P if Phi_fixed.size else Y
    if start is None:
        start = np.zeros((p, m))
    gram = Z_hat @ Z_hat.T / T
    cross = residual @ Z_hat.T / T
    return _prox_gradient_block(
        gram, cross, start, lambda point, step: svt(point, step * lambda_A), cfg
    )


def phi_step(Y, Z_hat, P, A_fixed, lambda_Phi: float, cfg: ProxConfig | None = None,
             start: np.ndarray | None = None) -> np.ndarray:
    """Minimize over Phi with A held fixed (elementwise-l1 proximal gradient).

    Solves (1/2T)||R - Phi P||_F^2 + lambda_Phi ||vec(Phi)||_1 with
    R = Y - A_fixed Z_hat.
    """
    cfg = cfg or ProxConfig()
    Y = _as_matrix(Y, "Y")
    Z_hat = _as_matrix(Z_hat, "Z_hat")
    P = _as_matrix(P, "P")
    A_fixed = _as_matrix(A_fixed, "A_fixed")
    _check_aligned(Y, Z_hat, P)
    if lambda_Phi < 0:
        raise InvalidArgument(f"lambda_Phi must be nonnegative, got {lambda_Phi}")
    p, T = Y.shape
    q = P.shape[0]
    residual = Y - A_fixed @ Z_hat if A_fixed.size else Y
    if start is None:
        start = np.zeros((p, q))
    gram = P @ P.T / T
    cross = residual @ P.T / T
    return _prox_gradient_block(
        gram, cross, start, lambda point, step: soft_threshold(point, step * lambda_Phi), cfg
    )


def _block_moved(new: np.ndarray, prev: np.ndarray, tol: float) -> bool:
    if new.size == 0:
        return False
    return float(np.linalg.norm(new - prev)) > tol * max(1.0, float(np.linalg.norm(new)))


def fit_rrsra(Y, Z_hat, d: int, lambda_A: float, lambda_Phi: float,
              outer_tol: float = 1e-6, max_outer: int = 500,
              cfg: ProxConfig | None = None) -> RrsraFit:
    """Alternate exact A- and Phi-block minimizations from Phi = 0.

    Parameters
    ----------
    Y : ndarray
        p x T targets, columns are time.
    Z_hat : ndarray
        m x T aligned design; column t holds z_hat_{t-1} (first column 0).
    d : int
        Lag order of the autoregressive block; d = 0 drops the block and
        the whole fit reduces to the A-step. The lag design is built from
        Y itself with zero padding before time 1.
    lambda_A, lambda_Phi : float
        Penalty weights (nuclear on A, l1 on Phi).
    outer_tol : float
        Relative Frobenius change of both blocks that ends the loop.
    max_outer : int
        Outer iteration cap.
    cfg : ProxConfig, optional
        Inner-loop settings shared by both block solvers.

    Raises
    ------
    NumericalFailure
        On non-finite intermediates.
    InternalError
        If the objective increases beyond 1e-8 between sweeps (a bug
        sentinel; exact block minimization cannot increase it).
    """
    cfg = cfg or ProxConfig()
    Y = _as_matrix(Y, "Y")
    Z_hat = _as_matrix(Z_hat, "Z_hat")
    if Y.shape[1] != Z_hat.shape[1]:
        raise InvalidArgument(
            f"Y has {Y.shape[1]} periods but Z_hat has {Z_hat.shape[1]}"
        )
    if int(d) != d or d < 0:
        raise InvalidArgument(f"lag order must be a nonnegative integer, got {d}")
    if lambda_A < 0 or lambda_Phi < 0:
        raise InvalidArgument("penalty weights must be nonnegative")
    if max_outer < 1:
        raise InvalidArgument(f"max_outer must be >= 1, got {max_outer}")
    d = int(d)
    p, T = Y.shape
    m = Z_hat.shape[0]
    P = _lag_design(Y, d)

    gram_Z = Z_hat @ Z_hat.T / T
    gram_P = P @ P.T / T
    prox_A = lambda point, step: svt(point, step * lambda_A)
    prox_Phi = lambda point, step: soft_threshold(point, step * lambda_Phi)

    A = np.zeros((p, m))
    Phi = np.zeros((p, d * p))
    trace = [rrsra_objective(Y, Z_hat, P, A, Phi, lambda_A, lambda_Phi)]
    converged = False
    iterations = 0
    for k in range(1, max_outer + 1):
        A_prev, Phi_prev = A, Phi
        residual_a = Y - Phi @ P if Phi.size else Y
        A = _prox_gradient_block(gram_Z, residual_a @ Z_hat.T / T, A_prev, prox_A, cfg)
        if d > 0:
            residual_phi = Y - A @ Z_hat if A.size else Y
            Phi = _prox_gradient_block(gram_P, residual_phi @ P.T / T, Phi_prev, prox_Phi, cfg)
        objective = rrsra_objective(Y, Z_hat, P, A, Phi, lambda_A, lambda_Phi)
        if objective > trace[-1] + _MONOTONE_SLACK:
            raise InternalError(
                f"objective increased from {trace[-1]!r} to {objective!r} at sweep {k}"
            )
        trace.append(objective)
        iterations = k
        if not _block_moved(A, A_prev, outer_tol) and not _block_moved(Phi, Phi_prev, outer_tol):
            converged = True
            break
    return RrsraFit(
        A_hat=A,
        Phi_hat=Phi,
        lambda_A=float(lambda_A),
        lambda_Phi=float(lambda_Phi),
        d=d,
        objective_trace=tuple(trace),
        iterations=iterations,
        converged=converged,
    )


def effective_rank(fit, rel_tol: float = 1e-2) -> EffectiveRankReport:
    """Recovered rank of A_hat and support of the lag block.

    rank_A counts singular values above rel_tol * sigma_max(A_hat);
    support_Phi collects (row, col) indices with |Phi_ij| above
    rel_tol * max|Phi|. Accepts any fit exposing A_hat and either a stacked
    Phi_hat or a list Phi_hats.
    """
    if not 0 < rel_tol < 1:
        raise InvalidArgument(f"rel_tol must lie in (0, 1), got {rel_tol}")
    A = np.asarray(fit.A_hat, dtype=float)
    Phi = getattr(fit, "Phi_hat", None)
    if Phi is None:
        Phi = np.hstack(fit.Phi_hats) if fit.Phi_hats else np.zeros((A.shape[0], 0))
    Phi = np.asarray(Phi, dtype=float)

    if A.size:
        singular_values = np.linalg.svd(A, compute_uv=False)
    else:
        singular_values = np.zeros(0)
    smax = float(singular_values[0]) if singular_values.size else 0.0
    rank = int(np.sum(singular_values > rel_tol * smax)) if smax > 0 else 0

    support: list[tuple[int, int]] = []
    if Phi.size:
        peak = float(np.max(np.abs(Phi)))
        if peak > 0:
            support = [
                (int(i), int(j)) for i, j in np.argwhere(np.abs(Phi) > rel_tol * peak)
            ]
            support.sort()
    return EffectiveRankReport(
        rank_A=rank,
        singular_values=tuple(float(v) for v in singular_values),
        support_Phi=tuple(support),
        cardinality=len(support),
    )


def significant_cointegrating_vectors(fit, Bc_hat, rel_tol: float = 1e-2) -> np.ndarray:
    """Rows spanning the cointegrating combinations that carry signal.

    With A_hat = C R' the rank-k0 SVD factorization (R = unit-norm right
    singular vectors; the scale sits in C), the returned matrix is
    R' Bc_hat', one row per significant direction. Rows are mutually
    orthonormal because Bc_hat has orthonormal columns.

    Raises
    ------
    EmptyResult
        If the recovered rank is zero.
    """
    Bc_hat = _as_matrix(Bc_hat, "Bc_hat")
    A = np.asarray(fit.A_hat, dtype=float)
    if A.shape[1] != Bc_hat.shape[1]:
        raise InvalidArgument(
            f"A_hat has {A.shape[1]} columns but Bc_hat has {Bc_hat.shape[1]}"
        )
    k0 = effective_rank(fit, rel_tol).rank_A
    if k0 == 0:
        raise EmptyResult("A_hat has rank 0: no significant cointegrating vectors")
    _, _, Vt = np.linalg.svd(A, full_matrices=False)
    return Vt[:k0] @ Bc_hat.T
