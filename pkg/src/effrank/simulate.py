"""Ground-truth data generation for the two simulation designs.

Both designs share the factor block: an N x N random orthogonal matrix is
split into loadings B (first r columns) and complement Bc; factors follow a
random walk f_t = f_{t-1} + sqrt(N) * u_t from f_0 = 0 (the sqrt(N) scaling
is applied to the innovations once, here); x_t = B f_t + eps_t; the true
stationary series is z_t = Bc' x_t (= Bc' eps_t). The target follows
y_t = A z_{t-1} + sum_i Phi_i y_{t-i} + e_t with zero pre-sample values.

Design "rrsra": A = U D V' with rank 5 (singular values uniform on [0.1, 1)),
one sparse lag matrix Phi with 20 randomly placed entries uniform on
(-1, -0.1] u [0.1, 1), rescaled to spectral norm 0.9.

Design "irra": two rank-3 lag matrices built like A, jointly rescaled by the
largest c <= 1 that brings the VAR(2) companion spectral radius to at most
0.95 (recorded as ``stationarity_scale``).

All innovations are standard normal. Randomness goes through numpy's Philox
counter-based generator seeded via SeedSequence; replication_rngs spawns
independent per-replication streams from a single seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, StationarityFailure
from .panel import Panel

_RANK_A = 5
_PHI_NNZ = 20
_RANK_PHI = 3
_COMPANION_RADIUS = 0.95


@dataclass(frozen=True)
class SimScenario:
    """Fixed coefficient matrices and sizes for one simulation design.

    ``support_Phi`` (sparse design) or ``ranks_Phi`` (low-rank design) is the
    truth descriptor for the lag block; the other is None.
    """

    dgp: str
    p: int
    N: int
    r: int
    T: int
    d: int
    seed: int
    B: np.ndarray
    Bc: np.ndarray
    A: np.ndarray
    Phis: tuple[np.ndarray, ...]
    rank_A: int
    support_Phi: tuple[tuple[int, int], ...] | None
    ranks_Phi: tuple[int, ...] | None
    stationarity_scale: float = 1.0

    @property
    def Phi_stacked(self) -> np.ndarray:
        """The lag matrices side by side, p x (d*p)."""
        return np.hstack(self.Phis)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "dgp": self.dgp,
            "p": int(self.p),
            "N": int(self.N),
            "r": int(self.r),
            "T": int(self.T),
            "d": int(self.d),
            "seed": int(self.seed),
            "rank_A": int(self.rank_A),
            "support_Phi": None
            if self.support_Phi is None
            else [[int(i), int(j)] for i, j in self.support_Phi],
            "ranks_Phi": None
            if self.ranks_Phi is None
            else [int(k) for k in self.ranks_Phi],
            "stationarity_scale": float(self.stationarity_scale),
            "B": self.B.tolist(),
            "Bc": self.Bc.tolist(),
            "A": self.A.tolist(),
            "Phis": [Phi.tolist() for Phi in self.Phis],
        }


@dataclass(frozen=True)
class SimSample:
    """One simulated path: observed panels plus the latent truth."""

    x: Panel
    y: Panel
    f: np.ndarray
    z: np.ndarray

    def head(self, T: int) -> "SimSample":
        """The first T periods of every component.

        All recursions are causal with zero pre-sample values, so the prefix
        of a long path is exactly the path the same draws would have produced
        at the shorter length; slicing isolates the effect of T.
        """
        return SimSample(
            x=self.x.head(T), y=self.y.head(T), f=self.f[:, :T], z=self.z[:, :T]
        )


def scenario_rng(seed: int) -> np.random.Generator:
    """Philox generator for scenario-level (coefficient) draws."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def replication_rngs(seed: int, n_reps: int) -> list[np.random.Generator]:
    """Independent Philox streams for n_reps replications.

    Children of SeedSequence(seed) are statistically independent of each
    other and of the scenario stream built from the same seed.
    """
    if n_reps < 1:
        raise InvalidArgument(f"need at least one replication, got {n_reps}")
    children = np.random.SeedSequence(seed).spawn(n_reps)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random n x n orthogonal matrix: QR of an i.i.d. normal matrix.

    The R factor's diagonal signs are absorbed into Q (positive-diagonal
    convention), which makes the distribution the canonical one and the
    output unique for a given normal draw.
    """
    if int(n) != n or n < 1:
        raise InvalidArgument(f"n must be a positive integer, got {n}")
    normal = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(normal)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def _random_low_rank(rows: int, cols: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """U D V' with ``rank`` singular values drawn uniform on [0.1, 1)."""
    U = random_orthogonal(rows, rng)
    V = random_orthogonal(cols, rng)
    singular_values = rng.uniform(0.1, 1.0, size=rank)
    return (U[:, :rank] * singular_values) @ V[:, :rank].T


def _check_factor_sizes(p: int, N: int, r: int, T: int) -> None:
    for name, v in (("p", p), ("N", N), ("r", r), ("T", T)):
        if int(v) != v or v < 0:
            raise InvalidArgument(f"{name} must be a nonnegative integer, got {v}")
    if p < 1 or N < 1 or T < 1:
        raise InvalidArgument(f"sizes must be positive, got p={p}, N={N}, T={T}")
    if not 0 <= r < N:
        raise InvalidArgument(f"need 0 <= r < N, got r={r}, N={N}")


def make_scenario_rrsra(p: int, N: int, r: int, T: int, seed: int) -> SimScenario:
    """Scenario with rank-5 A and a 20-entry sparse lag matrix (d = 1).

    Requires rank 5 <= min(p, N - r) and 20 <= p^2. ||Phi||_2 = 0.9 exactly
    by construction, which guarantees stationarity of the lag polynomial.
    """
    _check_factor_sizes(p, N, r, T)
    if _RANK_A > min(p, N - r):
        raise InvalidArgument(
            f"rank {_RANK_A} exceeds min(p, N - r) = {min(p, N - r)}"
        )
    if _PHI_NNZ > p * p:
        raise InvalidArgument(f"need {_PHI_NNZ} <= p^2 = {p * p}")
    rng = scenario_rng(seed)
    basis = random_orthogonal(N, rng)
    B, Bc = basis[:, :r], basis[:, r:]
    A = _random_low_rank(p, N - r, _RANK_A, rng)

    positions = rng.choice(p * p, size=_PHI_NNZ, replace=False)
    magnitudes = rng.uniform(0.1, 1.0, size=_PHI_NNZ)
    signs = rng.integers(0, 2, size=_PHI_NNZ) * 2.0 - 1.0
    raw = np.zeros(p * p)
    raw[positions] = signs * magnitudes
    raw = raw.reshape(p, p)
    Phi = 0.9 * raw / np.linalg.norm(raw, 2)
    support = tuple(sorted((int(i), int(j)) for i, j in np.argwhere(raw != 0)))

    return SimScenario(
        dgp="rrsra",
        p=p, N=N, r=r, T=T, d=1, seed=seed,
        B=B, Bc=Bc, A=A, Phis=(Phi,),
        rank_A=_RANK_A,
        support_Phi=support,
        ranks_Phi=None,
    )


def _companion_radius(Phis: tuple[np.ndarray, ...]) -> float:
    """Spectral radius of the VAR(d) companion matrix."""
    d = len(Phis)
    p = Phis[0].shape[0]
    companion = np.zeros((d * p, d * p))
    companion[:p] = np.hstack(Phis)
    if d > 1:
        companion[p:, : (d - 1) * p] = np.eye((d - 1) * p)
    return float(np.max(np.abs(np.linalg.eigvals(companion))))


def make_scenario_irra(p: int, N: int, r: int, T: int, seed: int) -> SimScenario:
    """Scenario with rank-5 A and two rank-3 lag matrices (d = 2).

    Both lag matrices are rescaled jointly by the largest c <= 1 giving a
    companion spectral radius of at most 0.95; c is recorded as
    ``stationarity_scale``.
    """
    _check_factor_sizes(p, N, r, T)
    if _RANK_A > min(p, N - r):
        raise InvalidArgument(
            f"rank {_RANK_A} exceeds min(p, N - r) = {min(p, N - r)}"
        )
    if _RANK_PHI > p:
        raise InvalidArgument(f"need rank {_RANK_PHI} <= p = {p}")
    rng = scenario_rng(seed)
    basis = random_orthogonal(N, rng)
    B, Bc = basis[:, :r], basis[:, r:]
    A = _random_low_rank(p, N - r, _RANK_A, rng)
    raw_phis = tuple(_random_low_rank(p, p, _RANK_PHI, rng) for _ in range(2))

    scale = 1.0
    if _companion_radius(raw_phis) > _COMPANION_RADIUS:
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if _companion_radius(tuple(mid * Phi for Phi in raw_phis)) <= _COMPANION_RADIUS:
                lo = mid
            else:
                hi = mid
        scale = lo
    Phis = tuple(scale * Phi for Phi in raw_phis)
    if not _companion_radius(Phis) <= _COMPANION_RADIUS + 1e-9:
        raise StationarityFailure(
            f"could not rescale the lag block to spectral radius {_COMPANION_RADIUS}"
        )

    return SimScenario(
        dgp="irra",
        p=p, N=N, r=r, T=T, d=2, seed=seed,
        B=B, Bc=Bc, A=A, Phis=Phis,
        rank_A=_RANK_A,
        support_Phi=None,
        ranks_Phi=(_RANK_PHI, _RANK_PHI),
        stationarity_scale=scale,
    )


def generate(scenario: SimScenario, rng: np.random.Generator, T: int | None = None) -> SimSample:
    """Draw one sample path from a scenario.

    Innovations are drawn in a fixed order (u, eps, e) so a given generator
    state maps to exactly one sample. ``T`` overrides the scenario length.
    To compare sample lengths on shared innovations, generate once at the
    longest T and slice with :meth:`SimSample.head`; calling generate twice
    with different T consumes the stream at different offsets.
    """
    T = scenario.T if T is None else int(T)
    if T < 1:
        raise InvalidArgument(f"T must be positive, got {T}")
    p, N, r = scenario.p, scenario.N, scenario.r

    u = rng.standard_normal((T, r))
    eps = rng.standard_normal((T, N))
    e = rng.standard_normal((T, p))

    f = np.cumsum(np.sqrt(N) * u, axis=0).T
    x_values = f.T @ scenario.B.T + eps
    z = (x_values @ scenario.Bc).T

    y_values = np.empty((T, p))
    for t in range(T):
        acc = e[t].copy()
        if t >= 1:
            acc += scenario.A @ z[:, t - 1]
        for i, Phi in enumerate(scenario.Phis, start=1):
            if t >= i:
                acc += Phi @ y_values[t - i]
        y_values[t] = acc

    x = Panel(x_values, tuple(f"x{j}" for j in range(N)))
    y = Panel(y_values, tuple(f"y{j}" for j in range(p)))
    return SimSample(x=x, y=y, f=f, z=z)
