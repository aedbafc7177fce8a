"""Reduced-rank plus sparse regression for cointegrated panels.

The package estimates the common stochastic trends of a large observed
panel, forms the stationary linear combinations orthogonal to those trends,
and regresses a target panel on them with a nuclear-norm penalty on the
factor coefficient and either an entrywise l1 penalty or per-lag nuclear
penalties on the autoregressive part. Simulation, tuning, forecasting, and
Monte Carlo evaluation live in their own modules and are re-exported here.
"""

from . import errors
from .evaluation import (
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
    run_irra_study,
    run_loading_study,
    run_rrsra_study,
    subspace_distance,
)
from .factors import (
    FactorFit,
    TrendDetectorConfig,
    acf_abs_sum,
    cointegrated_series,
    detect_num_trends,
    estimate_loadings,
    factor_recovery_rmse,
)
from .irra import IrraFit, default_weights, fit_irra, irra_objective
from .panel import Panel, center, lag_stack, load_csv, save_csv
from .regularizers import ProxConfig, lipschitz_step, soft_threshold, svt
from .rrsra import (
    EffectiveRankReport,
    RrsraFit,
    a_step,
    effective_rank,
    fit_rrsra,
    phi_step,
    rrsra_objective,
    significant_cointegrating_vectors,
)
from .simulate import (
    SimSample,
    SimScenario,
    generate,
    make_scenario_irra,
    make_scenario_rrsra,
    random_orthogonal,
    replication_rngs,
    scenario_rng,
)
from .tuning import (
    GridScore,
    TuningGrid,
    TuningResult,
    default_grid,
    default_lambda_A,
    default_lambda_Phi,
    forecast_error,
    predict_one_step,
    select_tuning,
)

__version__ = "0.1.0"

__all__ = [
    "ForecastReport",
    "MetricSummary",
    "aligned_design",
    "fit_rmse",
    "naive_var_fit",
    "nearest_rank_quantile",
    "oos_r2",
    "random_walk_predict",
    "run_detection_study",
    "run_expanding_window",
    "run_irra_study",
    "run_loading_study",
    "run_rrsra_study",
    "subspace_distance",
    "FactorFit",
    "TrendDetectorConfig",
    "acf_abs_sum",
    "cointegrated_series",
    "detect_num_trends",
    "estimate_loadings",
    "factor_recovery_rmse",
    "IrraFit",
    "default_weights",
    "fit_irra",
    "irra_objective",
    "Panel",
    "center",
    "lag_stack",
    "load_csv",
    "save_csv",
    "ProxConfig",
    "lipschitz_step",
    "soft_threshold",
    "svt",
    "EffectiveRankReport",
    "RrsraFit",
    "a_step",
    "effective_rank",
    "fit_rrsra",
    "phi_step",
    "rrsra_objective",
    "significant_cointegrating_vectors",
    "SimSample",
    "SimScenario",
    "generate",
    "make_scenario_irra",
    "make_scenario_rrsra",
    "random_orthogonal",
    "replication_rngs",
    "scenario_rng",
    "GridScore",
    "TuningGrid",
    "TuningResult",
    "default_grid",
    "default_lambda_A",
    "default_lambda_Phi",
    "forecast_error",
    "predict_one_step",
    "select_tuning",
    "errors",
    "__version__",
]
