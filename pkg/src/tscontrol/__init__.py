"""Targeted synthetic control estimators for single-treated-unit panel data.

The package provides the targeted synthetic control (TSC) estimator and its
baselines (classical synthetic control, plug-in regression, augmented
synthetic control), synthetic panel generators with known ground truth, and
a benchmark harness. See the README for usage.
"""

__version__ = "0.1.0"

from .bench import (
    BenchPlan,
    BenchReport,
    default_dgp_grid,
    default_estimator_grid,
    export_report,
    rmse,
    run_bench,
    violation_rate,
)
from .dgp import DgpConfig, binarize, draw_components, gen_panel
from .estimators import (
    AugmentedSyntheticControl,
    ClassicalSyntheticControl,
    EstimatorConfig,
    EstimatorResult,
    PlugInEstimator,
    TargetedSyntheticControl,
    decomposition_check,
    estimate,
    estimate_augmented_sc,
    estimate_classical_sc,
    estimate_plugin,
    estimate_tsc,
)
from .panel import GroundTruth, PanelDataset, build_features, horizon_bounds, validate_panel
from .panel_io import load_panel_csv, write_panel_csv
from .regression import (
    LinearOutcomeModel,
    MlpOutcomeModel,
    RegressorSpec,
    cross_fit_control_predictions,
    fit_outcome_model,
)
from .targeting import (
    TargetingConfig,
    TargetingResult,
    TiltScores,
    compute_scores,
    score_equation,
    solve_epsilon,
    targeted_weights,
    tilt_weights,
)
from .weights import MatchConfig, WeightsSolution, project_simplex, solve_sc_weights, weighted_average

__all__ = [
    "AugmentedSyntheticControl",
    "BenchPlan",
    "BenchReport",
    "ClassicalSyntheticControl",
    "DgpConfig",
    "EstimatorConfig",
    "EstimatorResult",
    "GroundTruth",
    "LinearOutcomeModel",
    "MatchConfig",
    "MlpOutcomeModel",
    "PanelDataset",
    "PlugInEstimator",
    "RegressorSpec",
    "TargetedSyntheticControl",
    "TargetingConfig",
    "TargetingResult",
    "TiltScores",
    "WeightsSolution",
    "binarize",
    "build_features",
    "compute_scores",
    "cross_fit_control_predictions",
    "decomposition_check",
    "default_dgp_grid",
    "default_estimator_grid",
    "draw_components",
    "estimate",
    "estimate_augmented_sc",
    "estimate_classical_sc",
    "estimate_plugin",
    "estimate_tsc",
    "export_report",
    "fit_outcome_model",
    "gen_panel",
    "horizon_bounds",
    "load_panel_csv",
    "project_simplex",
    "rmse",
    "run_bench",
    "score_equation",
    "solve_epsilon",
    "solve_sc_weights",
    "targeted_weights",
    "tilt_weights",
    "validate_panel",
    "violation_rate",
    "weighted_average",
    "write_panel_csv",
]
