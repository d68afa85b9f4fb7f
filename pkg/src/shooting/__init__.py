"""Gradient-ensemble regression around randomized linear initializations."""

from .baselines import (
    GBMConfig,
    GradientBoosting,
    RandomForest,
    RFConfig,
    fit_gbm,
    fit_rf,
    predict_gbm,
    predict_rf,
)
from .data import (
    ComparisonReport,
    Dataset,
    DegenerateTestError,
    MetricError,
    ParseError,
    TrialReport,
    load_auto_mpg,
    make_synthetic,
    mse,
    paired_t_test,
    r_squared,
    split,
    student_t_p,
    summarize_trials,
)
from .ensemble import (
    PCADiagnostics,
    ShootingEnsemble,
    SRConfig,
    fit_shooting,
    gradient_targets,
    initial_vectors,
    oracle_predict,
    pca_project_diagnostics,
    predict,
    predict_per_estimator,
    project_trajectories,
)
from .linear import (
    FactorizationError,
    LinearModel,
    OffsetSet,
    SingularDesignError,
    augment,
    fit_ols,
    predict_linear,
    sample_offsets,
)
from .nuopt import (
    DegenerateCorrelationError,
    NuCache,
    NuResult,
    balanced_magnitude_weight,
    build_cache,
    correlation_at,
    minimize_nu,
    objective,
)
from .persist import PersistError, load_model, model_from_dict, model_to_dict, save_model
from .tree import RegressionTree, TreeParams, fit_tree, predict_tree

__version__ = "0.1.0"

__all__ = [
    "ComparisonReport",
    "Dataset",
    "DegenerateCorrelationError",
    "DegenerateTestError",
    "FactorizationError",
    "GBMConfig",
    "GradientBoosting",
    "LinearModel",
    "MetricError",
    "NuCache",
    "NuResult",
    "OffsetSet",
    "ParseError",
    "PCADiagnostics",
    "PersistError",
    "RFConfig",
    "RandomForest",
    "RegressionTree",
    "SRConfig",
    "ShootingEnsemble",
    "SingularDesignError",
    "TreeParams",
    "TrialReport",
    "augment",
    "balanced_magnitude_weight",
    "build_cache",
    "correlation_at",
    "fit_gbm",
    "fit_ols",
    "fit_rf",
    "fit_shooting",
    "fit_tree",
    "gradient_targets",
    "initial_vectors",
    "load_auto_mpg",
    "load_model",
    "make_synthetic",
    "minimize_nu",
    "model_from_dict",
    "model_to_dict",
    "mse",
    "objective",
    "oracle_predict",
    "paired_t_test",
    "pca_project_diagnostics",
    "predict",
    "predict_gbm",
    "predict_linear",
    "predict_per_estimator",
    "predict_rf",
    "predict_tree",
    "project_trajectories",
    "r_squared",
    "sample_offsets",
    "save_model",
    "split",
    "student_t_p",
    "summarize_trials",
]
