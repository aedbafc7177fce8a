"""Proximal operators and step sizes shared by the alternating solvers.

The smooth loss everywhere in this package is (1/2T)||R - W D||_F^2 for a
coefficient block W against a k x T design D, whose gradient is Lipschitz
with constant L = sigma_max(D)^2 / T. The two penalties in play are the
nuclear norm (prox = singular-value soft-thresholding) and the elementwise
l1 norm (prox = scalar soft-thresholding).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDesign, InvalidArgument


@dataclass(frozen=True)
class ProxConfig:
    """Inner-loop settings for one proximal-gradient block solve.

    Parameters
    ----------
    max_inner_iter : int
        Iteration cap for a single block solve.
    inner_tol : float
        Relative Frobenius-change threshold that ends the loop.
    step_scale : float
        Multiplier in (0, 1] on the exact 1/L step (1.0 = plain 1/L; the
        loss is quadratic, so no backtracking is needed).
    """

    max_inner_iter: int = 2000
    inner_tol: float = 1e-10
    step_scale: float = 1.0

    def __post_init__(self):
        if self.max_inner_iter < 1:
            raise InvalidArgument(f"max_inner_iter must be >= 1, got {self.max_inner_iter}")
        if not self.inner_tol > 0:
            raise InvalidArgument(f"inner_tol must be > 0, got {self.inner_tol}")
        if not 0 < self.step_scale <= 1:
            raise InvalidArgument(f"step_scale must be in (0, 1], got {self.step_scale}")


def soft_threshold(x, lam: float):
    """Shrink toward zero: sign(x) * max(|x| - lam, 0).

    Works elementwise on arrays; applied to a matrix it is the proximal map
    of lam*||vec(.)||_1.
    """
    if lam < 0:
        raise InvalidArgument(f"threshold must be nonnegative, got {lam}")
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


def svt(M: np.ndarray, lam: float) -> np.ndarray:
    """Singular-value soft-thresholding, the proximal map of lam*||.||_*.

    Returns U * max(S - lam, 0) * V' for an SVD M = U S V'. The output rank
    never exceeds the input rank, and svt(M, 0) = M up to SVD round-off.
    """
    if lam < 0:
        raise InvalidArgument(f"threshold must be nonnegative, got {lam}")
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise InvalidArgument("svt input must be finite")
    if M.size == 0:
        return M.copy()
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    return (U * np.maximum(s - lam, 0.0)) @ Vt


def lipschitz_step(design: np.ndarray) -> float:
    """Exact proximal-gradient step 1/L for the loss (1/2T)||R - W D||_F^2.

    L = sigma_max(design)^2 / T where T is the number of columns, so the
    returned step is T / sigma_max(design)^2.

    Raises
    ------
    DegenerateDesign
        If the design matrix is identically zero.
    """
    design = np.asarray(design, dtype=float)
    if design.ndim != 2:
        raise InvalidArgument(f"design must be 2-D, got ndim={design.ndim}")
    smax = float(np.linalg.norm(design, 2)) if design.size else 0.0
    if smax == 0.0:
        raise DegenerateDesign("design matrix is identically zero")
    T = design.shape[1]
    return T / smax**2
