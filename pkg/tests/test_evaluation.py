"""Distances, forecast accounting, baselines, and the replication studies.

Oracles: the sin-theta formula through an independent SVD of M1'M2, the
normal equations solved with an explicit inverse, and hand-built quantile
and R^2 arithmetic.
"""

import numpy as np
import pytest

from effrank.errors import (
    DegenerateTarget,
    InvalidArgument,
    LeastSquaresUnderdetermined,
)
from effrank.evaluation import (
    ForecastReport,
    MetricSummary,
    aligned_design,
    fit_rmse,
    naive_var_fit,
    nearest_rank_quantile,
    oos_r2,
    random_walk_predict,
    run_detection_study,
    run_expanding_window,
    run_loading_study,
    run_rrsra_study,
    subspace_distance,
)
from effrank.factors import estimate_loadings
from effrank.panel import Panel
from effrank.rrsra import RrsraFit, fit_rrsra
from effrank.simulate import generate, make_scenario_rrsra, replication_rngs


def _panel(values, prefix="s"):
    values = np.asarray(values, dtype=float)
    return Panel(values, tuple(f"{prefix}{j}" for j in range(values.shape[1])))


def _orthonormal(n, k, rng):
    Q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return Q


def sin_theta_oracle(M1, M2):
    """Largest principal angle's sine, from the SVD of M1'M2."""
    sv = np.linalg.svd(M1.T @ M2, compute_uv=False)
    smallest = sv[-1] if sv.size else 0.0
    return float(np.sqrt(max(0.0, 1.0 - smallest**2)))


# ---------------------------------------------------------------- quantiles

def test_nearest_rank_five_values_by_hand():
    values = [7.0, 1.0, 5.0, 3.0, 9.0]  # sorted: 1 3 5 7 9
    assert nearest_rank_quantile(values, 0.25) == 3.0  # ceil(1.25) = 2nd
    assert nearest_rank_quantile(values, 0.5) == 5.0  # ceil(2.5) = 3rd
    assert nearest_rank_quantile(values, 0.75) == 7.0  # ceil(3.75) = 4th
    assert nearest_rank_quantile(values, 0.0) == 1.0
    assert nearest_rank_quantile(values, 1.0) == 9.0


def test_nearest_rank_is_always_a_data_point():
    rng = np.random.default_rng(0)
    for trial in range(20):
        vals = rng.standard_normal(int(rng.integers(1, 12)))
        q = nearest_rank_quantile(vals, float(rng.uniform(0, 1)))
        assert q in vals


def test_nearest_rank_validation():
    with pytest.raises(InvalidArgument):
        nearest_rank_quantile([], 0.5)
    with pytest.raises(InvalidArgument):
        nearest_rank_quantile([1.0], 1.5)


def test_metric_summary_fields():
    s = MetricSummary.from_values("m", [4.0, 1.0, 3.0, 2.0])
    assert s.n == 4
    assert s.mean == 2.5
    assert s.std == pytest.approx(np.std([1, 2, 3, 4], ddof=1))
    assert s.minimum == 1.0 and s.maximum == 4.0
    assert s.median == 2.0  # nearest rank: 2nd of 4
    assert s.values == (4.0, 1.0, 3.0, 2.0)
    single = MetricSummary.from_values("m", [5.0])
    assert single.std == 0.0
    assert single.median == 5.0


# ---------------------------------------------------------------- subspace distance

def test_subspace_distance_rotation_invariance():
    rng = np.random.default_rng(1)
    M = _orthonormal(6, 3, rng)
    R, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    assert subspace_distance(M, M @ R) == pytest.approx(0.0, abs=1e-10)


def test_subspace_distance_orthogonal_lines():
    e1 = np.array([[1.0], [0.0]])
    e2 = np.array([[0.0], [1.0]])
    assert subspace_distance(e1, e2) == pytest.approx(1.0)


def test_subspace_distance_matches_sin_theta_oracle():
    rng = np.random.default_rng(2)
    for trial in range(25):
        M1 = _orthonormal(5, 2, rng)
        M2 = _orthonormal(5, 2, rng)
        got = subspace_distance(M1, M2)
        assert got == pytest.approx(sin_theta_oracle(M1, M2), abs=1e-9)


def test_subspace_distance_pseudometric_triangle():
    rng = np.random.default_rng(3)
    for trial in range(20):
        A = _orthonormal(6, 2, rng)
        B = _orthonormal(6, 2, rng)
        C = _orthonormal(6, 2, rng)
        ab = subspace_distance(A, B)
        bc = subspace_distance(B, C)
        ac = subspace_distance(A, C)
        assert ac <= ab + bc + 1e-9


def test_subspace_distance_bounds_matched_dims():
    rng = np.random.default_rng(4)
    for trial in range(20):
        M1 = _orthonormal(7, 3, rng)
        M2 = _orthonormal(7, 3, rng)
        val = subspace_distance(M1, M2)
        assert -1e-12 <= val <= 1.0 + 1e-12


def test_subspace_distance_rejects_non_orthonormal():
    rng = np.random.default_rng(5)
    M = rng.standard_normal((5, 2))
    with pytest.raises(InvalidArgument):
        subspace_distance(M, _orthonormal(5, 2, rng))


# ---------------------------------------------------------------- oos r2

def test_oos_r2_arithmetic():
    a = np.array([1.0, 2.0])
    assert oos_r2(a, a) == 1.0
    assert oos_r2(a, np.zeros(2)) == 0.0
    assert oos_r2(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(-1.0)


def test_oos_r2_scale_covariance():
    rng = np.random.default_rng(6)
    a = rng.standard_normal(10)
    pred = rng.standard_normal(10)
    base = oos_r2(a, pred)
    assert oos_r2(5.0 * a, 5.0 * pred) == pytest.approx(base, abs=1e-12)


def test_oos_r2_guards():
    with pytest.raises(DegenerateTarget):
        oos_r2(np.zeros(3), np.ones(3))
    with pytest.raises(InvalidArgument):
        oos_r2(np.ones(3), np.ones(4))


# ---------------------------------------------------------------- fit rmse

def _truth_fit(scenario):
    return RrsraFit(
        A_hat=scenario.A, Phi_hat=scenario.Phi_stacked, lambda_A=0.0,
        lambda_Phi=0.0, d=scenario.d, objective_trace=(0.0,), iterations=0,
        converged=True,
    )


def test_fit_rmse_truth_is_zero():
    scenario = make_scenario_rrsra(6, 8, 2, 80, 7)
    sample = generate(scenario, replication_rngs(7, 1)[0])
    T = sample.y.n_periods
    Z_true = np.zeros((scenario.N - scenario.r, T))
    Z_true[:, 1:] = sample.z[:, : T - 1]
    assert fit_rmse(scenario, sample, _truth_fit(scenario), Z_true) == pytest.approx(
        0.0, abs=1e-12
    )


def test_fit_rmse_zero_fit_matches_loop_oracle():
    scenario = make_scenario_rrsra(6, 8, 2, 60, 8)
    sample = generate(scenario, replication_rngs(8, 1)[0])
    T = sample.y.n_periods
    zero = RrsraFit(
        A_hat=np.zeros_like(scenario.A), Phi_hat=np.zeros((6, 6)), lambda_A=0.0,
        lambda_Phi=0.0, d=1, objective_trace=(0.0,), iterations=0, converged=True,
    )
    Z_any = np.zeros((scenario.N - scenario.r, T))
    got = fit_rmse(scenario, sample, zero, Z_any)
    # truth's conditional mean, accumulated timestep by timestep
    y = sample.y.values
    total = 0.0
    for t in range(T):
        mean = np.zeros(6)
        if t >= 1:
            mean += scenario.A @ sample.z[:, t - 1]
            mean += scenario.Phis[0] @ y[t - 1]
        total += float(np.sum(mean**2))
    want = np.sqrt(total / (6 * T))
    assert got == pytest.approx(want, abs=1e-10)


def test_fit_rmse_median_decreases_in_t():
    scenario = make_scenario_rrsra(10, 12, 3, 1200, 9)
    vals = {400: [], 1200: []}
    for rng in replication_rngs(9, 12):
        sample = generate(scenario, rng)
        for T in vals:
            part = sample.head(T)
            ffit = estimate_loadings(part.x, 3)
            Z = aligned_design(part.x.values, ffit.Bc_hat)
            fit = fit_rrsra(part.y.values.T, Z, 1, np.sqrt(22 / T),
                            np.sqrt(np.log(10) / T))
            vals[T].append(fit_rmse(scenario, part, fit, Z))
    assert np.median(vals[1200]) < np.median(vals[400])


# ---------------------------------------------------------------- baselines

def test_naive_var_noiseless_recovery():
    rng = np.random.default_rng(10)
    p, T = 3, 400
    Phi_true = 0.5 * _orthonormal(p, p, rng)
    y = np.zeros((T, p))
    y[0] = rng.standard_normal(p)
    for t in range(1, T):
        y[t] = Phi_true @ y[t - 1]
        if np.linalg.norm(y[t]) < 1e-6:
            y[t] = rng.standard_normal(p)  # keep the design exciting
    got = naive_var_fit(_panel(y), 1)
    assert np.max(np.abs(got - Phi_true)) < 1e-6


def test_naive_var_scalar_ar1_slope():
    rng = np.random.default_rng(11)
    T = 300
    y = np.zeros((T, 1))
    for t in range(1, T):
        y[t] = 0.7 * y[t - 1] + rng.standard_normal()
    got = naive_var_fit(_panel(y), 1)[0, 0]
    # zero-padded design equals the drop-first-row regression here
    num = float(y[1:, 0] @ y[:-1, 0])
    den = float(y[:-1, 0] @ y[:-1, 0])
    assert got == pytest.approx(num / den, abs=1e-12)
    assert abs(got - 0.7) < 0.1


def test_naive_var_matches_normal_equations():
    rng = np.random.default_rng(12)
    T, p, d = 100, 2, 2
    y = rng.standard_normal((T, p))
    got = naive_var_fit(_panel(y), d)
    # explicit normal equations on the zero-padded lag design
    Y = y.T
    P = np.zeros((d * p, T))
    for i in range(1, d + 1):
        P[(i - 1) * p : i * p, i:] = Y[:, : T - i]
    want = np.linalg.solve(P @ P.T, P @ Y.T).T
    assert np.max(np.abs(got - want)) < 1e-8


def test_naive_var_underdetermined_warns():
    rng = np.random.default_rng(13)
    y = rng.standard_normal((4, 6))  # T = 4 < d*p = 6
    with pytest.warns(LeastSquaresUnderdetermined):
        out = naive_var_fit(_panel(y), 1)
    assert out.shape == (6, 6)


def test_naive_var_d0():
    rng = np.random.default_rng(14)
    out = naive_var_fit(_panel(rng.standard_normal((10, 3))), 0)
    assert out.shape == (3, 0)


def test_random_walk_predict_identity():
    rng = np.random.default_rng(15)
    for trial in range(3):
        vals = rng.standard_normal((12, 4))
        out = random_walk_predict(_panel(vals))
        np.testing.assert_array_equal(out, vals)
        out[0, 0] = 1e9  # the copy must not alias the panel
        assert vals[0, 0] != 1e9


# ---------------------------------------------------------------- aligned design

def test_aligned_design_shifts_by_one():
    rng = np.random.default_rng(16)
    xvals = rng.standard_normal((10, 4))
    Bc = _orthonormal(4, 2, rng)
    Z = aligned_design(xvals, Bc)
    assert Z.shape == (2, 10)
    np.testing.assert_array_equal(Z[:, 0], 0.0)
    for t in range(1, 10):
        np.testing.assert_allclose(Z[:, t], Bc.T @ xvals[t - 1], atol=1e-12)


# ---------------------------------------------------------------- expanding window

def test_expanding_window_low_noise_r2():
    rng = np.random.default_rng(17)
    p, T = 3, 120
    Phi_true = np.diag([0.98, 0.97, 0.96])
    y = np.zeros((T, p))
    for t in range(1, T):
        y[t] = Phi_true @ y[t - 1] + 0.05 * rng.standard_normal(p)
    x = rng.standard_normal((T, 4)).cumsum(axis=0)
    report = run_expanding_window(_panel(x, "x"), _panel(y, "y"), 100,
                                  method="rrsra", d=1, lambda_A=0.05,
                                  lambda_Phi=0.001, r=4)
    assert report.mean_r2 >= 0.9
    assert all(v <= 1.0 for v in report.per_origin_r2)


def test_expanding_window_random_walk_on_iid_noise():
    rng = np.random.default_rng(18)
    T = 200
    y = rng.standard_normal((T, 4))
    x = rng.standard_normal((T, 3)).cumsum(axis=0)
    report = run_expanding_window(_panel(x, "x"), _panel(y, "y"), 150, method="rw")
    # predicting white noise by its previous value doubles the error
    assert report.r2 == pytest.approx(-1.0, abs=0.35)
    assert report.d is None and report.lambda_A is None


def test_expanding_window_beats_naive_var_on_dgp():
    scenario = make_scenario_rrsra(8, 10, 3, 100, 19)
    sample = generate(scenario, replication_rngs(19, 1)[0])
    split = 80
    fitted = run_expanding_window(sample.x, sample.y, split, method="rrsra",
                                  d=1, r=3)
    var = run_expanding_window(sample.x, sample.y, split, method="var", d=1)
    assert fitted.mean_r2 > var.mean_r2


def test_expanding_window_report_accounting():
    rng = np.random.default_rng(20)
    T = 40
    x = rng.standard_normal((T, 3)).cumsum(axis=0)
    y = rng.standard_normal((T, 2))
    split = 30
    report = run_expanding_window(_panel(x, "x"), _panel(y, "y"), split,
                                  method="var", d=1)
    assert report.predictions.shape == (T - split, 2)
    np.testing.assert_array_equal(report.targets, y[split:])
    assert len(report.per_origin_r2) == T - split
    assert report.mean_r2 == pytest.approx(np.mean(report.per_origin_r2))
    assert report.r2_summary.n == T - split
    fe = np.sum((report.targets - report.predictions) ** 2) / (2 * (T - split))
    assert report.forecast_error == pytest.approx(fe)
    obj = report.to_json_dict()
    assert obj["schema_version"] == 1
    assert obj["n_origins"] == T - split
    assert obj["r2_oos"]["median"] == report.r2_summary.median


def test_expanding_window_auto_tune_smoke():
    from effrank.tuning import TuningGrid

    scenario = make_scenario_rrsra(6, 8, 2, 60, 21)
    sample = generate(scenario, replication_rngs(21, 1)[0])
    grid = TuningGrid((0.2, 0.6), (0.05,), (1,))
    report = run_expanding_window(sample.x, sample.y, 50, method="rrsra",
                                  grid=grid, tune_windows=5, r=2)
    assert (report.lambda_A, report.lambda_Phi) in {(0.2, 0.05), (0.6, 0.05)}
    assert report.d == 1


def test_expanding_window_validates():
    rng = np.random.default_rng(22)
    x = _panel(rng.standard_normal((20, 3)), "x")
    y = _panel(rng.standard_normal((20, 2)), "y")
    with pytest.raises(InvalidArgument):
        run_expanding_window(x, y, 2)
    with pytest.raises(InvalidArgument):
        run_expanding_window(x, y, 20)
    with pytest.raises(InvalidArgument):
        run_expanding_window(x, y, 10, method="arima")


# ---------------------------------------------------------------- studies

def test_rrsra_study_shapes_and_determinism():
    records = run_rrsra_study(6, 8, (80, 120), 3, seed=23, r=2)
    assert set(records) == {80, 120}
    assert len(records[80]) == 3
    first = records[80][0]
    for key in ("loading_dist", "a_dist", "phi_dist", "fit_rmse", "rank_A",
                "support_match", "iterations", "converged"):
        assert key in first
    again = run_rrsra_study(6, 8, (80, 120), 3, seed=23, r=2)
    assert records == again


def test_detection_study_grid_keys():
    results = run_detection_study((8, 10), (150,), 2, seed=24, p=6, r=2)
    assert set(results) == {(8, 150), (10, 150)}
    for cell, values in results.items():
        assert len(values) == 2
        for v in values:
            assert isinstance(v, int) and 0 <= v <= cell[0]


def test_loading_study_distances_bounded():
    results = run_loading_study((8,), (150, 300), 2, seed=25, p=6, r=2)
    for values in results.values():
        for v in values:
            assert 0.0 <= v <= 1.0 + 1e-9
