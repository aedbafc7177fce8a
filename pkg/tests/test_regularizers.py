import numpy as np
import pytest

from effrank.errors import DegenerateDesign
from effrank.regularizers import ProxConfig, lipschitz_step, soft_threshold, svt


# ---------------------------------------------------------------- oracles

def power_iteration_sigma_max(M, iters=500, seed=0):
    """Largest singular value via power iteration on M'M."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = M.T @ (M @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
    return float(np.linalg.norm(M @ v))


def nuclear_prox_objective(A, M, lam):
    return 0.5 * np.linalg.norm(A - M, "fro") ** 2 + lam * np.linalg.svd(
        A, compute_uv=False
    ).sum()


def l1_prox_objective(x, m, lam):
    return 0.5 * np.sum((x - m) ** 2) + lam * np.sum(np.abs(x))


# ---------------------------------------------------------------- soft_threshold

def test_soft_threshold_scalar_cases():
    assert soft_threshold(1.0, 0.3) == pytest.approx(0.7)
    assert soft_threshold(-0.2, 0.3) == 0.0
    assert soft_threshold(-1.0, 0.3) == pytest.approx(-0.7)


def test_soft_threshold_zero_lambda_is_identity():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((4, 6))
    np.testing.assert_array_equal(soft_threshold(x, 0.0), x)


def test_soft_threshold_is_l1_prox_by_perturbation():
    rng = np.random.default_rng(17)
    for trial in range(50):
        m = rng.standard_normal(8)
        lam = float(rng.uniform(0.0, 1.5))
        x = soft_threshold(m, lam)
        base = l1_prox_objective(x, m, lam)
        for _ in range(40):
            delta = rng.standard_normal(8)
            delta *= rng.uniform(0, 0.1) / max(np.linalg.norm(delta), 1e-12)
            assert l1_prox_objective(x + delta, m, lam) >= base - 1e-10


# ---------------------------------------------------------------- svt

def test_svt_diagonal_case():
    M = np.diag([3.0, 1.0])
    np.testing.assert_allclose(svt(M, 1.5), np.diag([1.5, 0.0]), atol=1e-12)


def test_svt_total_shrinkage():
    rng = np.random.default_rng(2)
    M = rng.standard_normal((5, 3))
    lam = np.linalg.svd(M, compute_uv=False)[0] + 1e-9
    np.testing.assert_allclose(svt(M, lam), 0.0, atol=1e-12)


def test_svt_zero_lambda_identity():
    rng = np.random.default_rng(8)
    M = rng.standard_normal((4, 7))
    np.testing.assert_allclose(svt(M, 0.0), M, atol=1e-10)


def test_svt_objective_beats_singular_value_grid():
    """The closed form must beat every candidate built from the same singular
    vectors with singular values scanned over a dense grid."""
    rng = np.random.default_rng(23)
    M = rng.standard_normal((4, 3))
    lam = 0.7
    best = svt(M, lam)
    base = nuclear_prox_objective(best, M, lam)
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    grid = np.linspace(0.0, s[0], 60)
    for s0 in grid:
        for s1 in grid:
            for s2 in grid:
                cand = U @ np.diag([s0, s1, s2]) @ Vt
                assert nuclear_prox_objective(cand, M, lam) >= base - 1e-8


def test_svt_perturbation_optimality():
    rng = np.random.default_rng(31)
    for trial in range(30):
        M = rng.standard_normal((4, 3))
        lam = float(rng.uniform(0.05, 2.0))
        A = svt(M, lam)
        base = nuclear_prox_objective(A, M, lam)
        for _ in range(40):
            D = rng.standard_normal(A.shape)
            D *= rng.uniform(0, 0.1) / max(np.linalg.norm(D, "fro"), 1e-12)
            assert nuclear_prox_objective(A + D, M, lam) >= base - 1e-10


def test_svt_non_expansive():
    rng = np.random.default_rng(41)
    for trial in range(50):
        M1 = rng.standard_normal((5, 4))
        M2 = rng.standard_normal((5, 4))
        lam = float(rng.uniform(0, 2))
        lhs = np.linalg.norm(svt(M1, lam) - svt(M2, lam), "fro")
        rhs = np.linalg.norm(M1 - M2, "fro")
        assert lhs <= rhs + 1e-10


def test_svt_rank_never_increases():
    rng = np.random.default_rng(13)
    for trial in range(20):
        M = rng.standard_normal((6, 4)) @ rng.standard_normal((4, 5))
        lam = float(rng.uniform(0.01, 1.0))
        out = svt(M, lam)
        assert np.linalg.matrix_rank(out, tol=1e-10) <= np.linalg.matrix_rank(
            M, tol=1e-10
        )


# ---------------------------------------------------------------- lipschitz_step

def test_lipschitz_step_identity_design():
    T = 6
    design = np.eye(T)
    assert lipschitz_step(design) == pytest.approx(T)


def test_lipschitz_step_scaling_law():
    T = 9
    for c in (0.5, 2.0, 7.0):
        design = c * np.eye(T)
        assert lipschitz_step(design) == pytest.approx(T / c**2)


def test_lipschitz_step_matches_power_iteration():
    rng = np.random.default_rng(77)
    design = rng.standard_normal((3, 50))
    smax = power_iteration_sigma_max(design)
    T = design.shape[1]
    assert lipschitz_step(design) == pytest.approx(T / smax**2, abs=1e-8)


def test_lipschitz_step_zero_design():
    with pytest.raises(DegenerateDesign):
        lipschitz_step(np.zeros((3, 10)))


def test_prox_config_validation():
    cfg = ProxConfig()
    assert cfg.max_inner_iter > 0 and cfg.inner_tol > 0
    assert 0 < cfg.step_scale <= 1
