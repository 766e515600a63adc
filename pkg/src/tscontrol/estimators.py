"""Counterfactual estimators for a single treated unit.

Four estimators share one interface. Per post-treatment step ``h`` they
produce the counterfactual ``psi_hat`` and effect ``tau_hat = observed -
psi_hat``:

* classical synthetic control: pre-treatment matching weights applied to
  control outcomes;
* plug-in: an outcome regression fitted on controls, evaluated at the
  treated unit's features;
* augmented synthetic control: the plug-in prediction plus a weighted
  control-residual correction (can leave the control outcome range);
* targeted synthetic control (TSC): matching weights retilted so the
  weighted control residuals vanish, then applied to control outcomes --
  a convex combination, hence always inside the control outcome range.

Each estimator is exposed both as a function of ``(panel, config)`` and as a
scikit-learn style class with ``fit`` / ``predict`` / ``get_params``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import ConfigError
from .panel import (
    PanelDataset,
    build_features,
    horizon_bounds,
    validate_panel,
)
from .regression import (
    RegressorSpec,
    cross_fit_control_predictions,
    fit_outcome_model,
)
from .targeting import (
    TargetingConfig,
    TargetingResult,
    compute_scores,
    targeted_weights,
)
from .validation import SEED_STREAM_HORIZON, derive_seed
from .weights import MatchConfig, WeightsSolution, solve_sc_weights, weighted_average

CLASSICAL_SC = "classical_sc"
PLUGIN = "plugin"
AUGMENTED_SC = "augmented_sc"
TSC = "tsc"
ESTIMATOR_KINDS = (CLASSICAL_SC, PLUGIN, AUGMENTED_SC, TSC)


@dataclass(frozen=True)
class EstimatorConfig:
    """Configuration shared by all estimator kinds.

    ``horizons`` are 1-based post-treatment offsets; None means every
    post-treatment period. ``cross_fit_folds`` switches control predictions
    to out-of-fold values (None keeps the single in-sample fit).
    """

    kind: str = TSC
    horizons: tuple[int, ...] | None = None
    match: MatchConfig = MatchConfig()
    regressor: RegressorSpec = RegressorSpec()
    targeting: TargetingConfig = TargetingConfig()
    cross_fit_folds: int | None = None

    def validate(self) -> "EstimatorConfig":
        if self.kind not in ESTIMATOR_KINDS:
            raise ConfigError(f"unknown estimator kind {self.kind!r}")
        self.match.validate()
        self.regressor.validate()
        self.targeting.validate()
        if self.horizons is not None:
            if len(self.horizons) == 0:
                raise ConfigError("horizons must be nonempty when given")
            if any(int(h) < 1 for h in self.horizons):
                raise ConfigError("horizons are 1-based post-treatment offsets")
        if self.cross_fit_folds is not None and self.cross_fit_folds < 2:
            raise ConfigError("cross_fit_folds must be >= 2")
        return self


@dataclass
class HorizonEstimate:
    """Counterfactual and diagnostics for one post-treatment step."""

    horizon: int
    time_index: int
    psi_hat: float
    tau_hat: float
    observed: float
    bounds: tuple[float, float]
    bounds_violation: bool
    weights: np.ndarray | None = None
    targeting: TargetingResult | None = None


@dataclass
class EstimatorResult:
    """Per-horizon estimates plus shared fit diagnostics."""

    kind: str
    estimates: list[HorizonEstimate] = field(default_factory=list)
    initial_weights: np.ndarray | None = None
    pretreatment_fit: float | None = None

    @property
    def horizons(self) -> np.ndarray:
        return np.array([e.horizon for e in self.estimates])

    @property
    def psi(self) -> np.ndarray:
        return np.array([e.psi_hat for e in self.estimates])

    @property
    def tau(self) -> np.ndarray:
        return np.array([e.tau_hat for e in self.estimates])


def _resolve_horizons(panel: PanelDataset, config: EstimatorConfig) -> tuple[int, ...]:
    if config.horizons is None:
        return tuple(range(1, panel.n_post_periods + 1))
    horizons = tuple(int(h) for h in config.horizons)
    for h in horizons:
        if panel.t0 + h > panel.n_periods:
            raise ConfigError(
                f"horizon {h} exceeds the {panel.n_post_periods} post-treatment periods"
            )
    return horizons


def _convex_combination(weights: np.ndarray, values: np.ndarray) -> float:
    """Dot product of simplex weights with values, clipped to the value range.

    A floating-point dot of weights summing to 1 +- few ulps can overshoot
    the value range by rounding error; mathematically the combination cannot.
    The overshoot is asserted to be rounding-scale before clipping.
    """
    total = weighted_average(weights, values)
    low, high = float(values.min()), float(values.max())
    guard = 1e-9 * max(1.0, abs(low), abs(high))
    if total < low - guard or total > high + guard:
        raise AssertionError(
            f"convex combination {total} escaped [{low}, {high}] beyond rounding error"
        )
    return min(max(total, low), high)


class _NuisanceCache:
    """Memoizes weight solves and per-horizon regression fits within one panel.

    Keys are the (frozen, hashable) configs, so identical nuisance requests
    from different estimators on the same panel are computed once.
    """

    def __init__(self):
        self._weights: dict = {}
        self._models: dict = {}
        self._control_preds: dict = {}

    def weights(self, key: MatchConfig, compute) -> WeightsSolution:
        if key not in self._weights:
            self._weights[key] = compute()
        return self._weights[key]

    def model(self, key, compute):
        if key not in self._models:
            self._models[key] = compute()
        return self._models[key]

    def control_preds(self, key, compute) -> np.ndarray:
        if key not in self._control_preds:
            self._control_preds[key] = compute()
        return self._control_preds[key]


def _horizon_model(feats_c, targets, spec: RegressorSpec, horizon: int, cache: _NuisanceCache):
    per_horizon = replace(spec, seed=derive_seed(spec.seed, SEED_STREAM_HORIZON, horizon))
    return cache.model(
        (per_horizon, horizon), lambda: fit_outcome_model(feats_c, targets, per_horizon, horizon)
    )


def _control_predictions(
    feats_c, targets, config: EstimatorConfig, horizon: int, cache: _NuisanceCache, model
) -> np.ndarray:
    """Control predictions, in-sample by default or out-of-fold when configured."""
    if config.cross_fit_folds is None:
        return cache.control_preds(
            ("insample", model.spec, horizon), lambda: model.predict(feats_c)
        )
    per_horizon = replace(
        config.regressor, seed=derive_seed(config.regressor.seed, SEED_STREAM_HORIZON, horizon)
    )
    return cache.control_preds(
        ("crossfit", per_horizon, config.cross_fit_folds, horizon),
        lambda: cross_fit_control_predictions(
            feats_c, targets, per_horizon, config.cross_fit_folds
        ),
    )


def estimate(
    panel: PanelDataset, config: EstimatorConfig, cache: _NuisanceCache | None = None
) -> EstimatorResult:
    """Run one estimator on a panel; the single entry point for all four kinds.

    ``cache`` may be shared by several calls on the *same* panel to reuse
    weight solves and regression fits across estimators.
    """
    config = config.validate()
    panel = validate_panel(panel)
    cache = cache or _NuisanceCache()
    horizons = _resolve_horizons(panel, config)
    feats = build_features(panel)
    controls = panel.control_indices
    x1 = feats[panel.treated_index]
    feats_c = feats[controls]

    needs_weights = config.kind in (CLASSICAL_SC, AUGMENTED_SC, TSC)
    needs_models = config.kind in (PLUGIN, AUGMENTED_SC, TSC)

    solution = None
    if needs_weights:
        match_cfg = config.match
        if config.kind == TSC:
            # TSC starts from the plain matching problem regardless of any
            # ridge configured for the augmented baseline.
            match_cfg = replace(config.match, ridge_lambda=0.0)
        solution = cache.weights(
            match_cfg, lambda: solve_sc_weights(x1, feats_c, match_cfg)
        )

    result = EstimatorResult(
        kind=config.kind,
        initial_weights=None if solution is None else solution.weights,
        pretreatment_fit=None if solution is None else solution.objective,
    )

    for h in horizons:
        t = panel.time_index(h)
        y_controls = panel.outcomes[controls, t]
        observed = float(panel.outcomes[panel.treated_index, t])
        bounds = horizon_bounds(panel, h)
        model = None
        if needs_models:
            model = _horizon_model(feats_c, y_controls, config.regressor, h, cache)

        weights_used: np.ndarray | None = None
        targeting_result: TargetingResult | None = None
        if config.kind == CLASSICAL_SC:
            weights_used = solution.weights
            psi = _convex_combination(weights_used, y_controls)
        elif config.kind == PLUGIN:
            psi = float(model.predict(x1[None, :])[0])
        elif config.kind == AUGMENTED_SC:
            preds = _control_predictions(feats_c, y_controls, config, h, cache, model)
            weights_used = solution.weights
            psi = float(model.predict(x1[None, :])[0]) + weighted_average(
                weights_used, y_controls - preds
            )
        else:  # TSC
            preds = _control_predictions(feats_c, y_controls, config, h, cache, model)
            residuals = y_controls - preds
            scores = compute_scores(
                preds, solution.weights, config.targeting.score_mode, outcomes=y_controls
            )
            targeting_result = targeted_weights(
                solution.weights, residuals, scores, config.targeting
            )
            weights_used = targeting_result.targeted_weights
            psi = _convex_combination(weights_used, y_controls)

        result.estimates.append(
            HorizonEstimate(
                horizon=h,
                time_index=t,
                psi_hat=psi,
                tau_hat=observed - psi,
                observed=observed,
                bounds=bounds,
                bounds_violation=psi < bounds[0] or psi > bounds[1],
                weights=weights_used,
                targeting=targeting_result,
            )
        )
    return result


def estimate_classical_sc(panel, config: EstimatorConfig | None = None) -> EstimatorResult:
    cfg = replace(config, kind=CLASSICAL_SC) if config else EstimatorConfig(kind=CLASSICAL_SC)
    return estimate(panel, cfg)


def estimate_plugin(panel, config: EstimatorConfig | None = None) -> EstimatorResult:
    cfg = replace(config, kind=PLUGIN) if config else EstimatorConfig(kind=PLUGIN)
    return estimate(panel, cfg)


def estimate_augmented_sc(panel, config: EstimatorConfig | None = None) -> EstimatorResult:
    cfg = replace(config, kind=AUGMENTED_SC) if config else EstimatorConfig(kind=AUGMENTED_SC)
    return estimate(panel, cfg)


def estimate_tsc(panel, config: EstimatorConfig | None = None) -> EstimatorResult:
    cfg = replace(config, kind=TSC) if config else EstimatorConfig(kind=TSC)
    return estimate(panel, cfg)


def decomposition_check(
    panel: PanelDataset, weights, model, horizon: int
) -> tuple[float, float, float]:
    """Split the weighted control outcome into model-average and residual terms.

    Returns ``(weighted_model_avg, weighted_residual, total)`` where the
    total equals ``sum_j w_j y_j`` by algebraic identity.
    """
    panel = validate_panel(panel)
    feats = build_features(panel)
    controls = panel.control_indices
    y = panel.outcomes[controls, panel.time_index(horizon)]
    preds = model.predict(feats[controls])
    model_avg = weighted_average(weights, preds)
    residual = weighted_average(weights, y - preds)
    return model_avg, residual, model_avg + residual


class _PanelEstimatorMixin:
    """fit/predict surface shared by the four estimator classes."""

    _kind: str = TSC

    def _build_config(self) -> EstimatorConfig:
        params = self.get_params(deep=False)
        horizons = params.pop("horizons", None)
        if horizons is not None:
            horizons = tuple(int(h) for h in horizons)
        return EstimatorConfig(
            kind=self._kind,
            horizons=horizons,
            match=params.get("match") or MatchConfig(),
            regressor=params.get("regressor") or RegressorSpec(),
            targeting=params.get("targeting") or TargetingConfig(),
            cross_fit_folds=params.get("cross_fit_folds"),
        )

    def fit(self, panel: PanelDataset):
        """Estimate counterfactuals for the panel; returns self."""
        self.result_ = estimate(panel, self._build_config())
        self.psi_ = self.result_.psi
        self.tau_ = self.result_.tau
        return self

    def predict(self) -> np.ndarray:
        """Counterfactual per configured horizon, in horizon order."""
        if not hasattr(self, "result_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")
        return self.psi_


class ClassicalSyntheticControl(_PanelEstimatorMixin, BaseEstimator):
    """Pre-treatment matching weights applied to control outcomes."""

    _kind = CLASSICAL_SC

    def __init__(self, horizons=None, match: MatchConfig | None = None):
        self.horizons = horizons
        self.match = match


class PlugInEstimator(_PanelEstimatorMixin, BaseEstimator):
    """Outcome regression evaluated at the treated unit's features."""

    _kind = PLUGIN

    def __init__(self, horizons=None, regressor: RegressorSpec | None = None):
        self.horizons = horizons
        self.regressor = regressor


class AugmentedSyntheticControl(_PanelEstimatorMixin, BaseEstimator):
    """Plug-in prediction plus a weighted control-residual correction."""

    _kind = AUGMENTED_SC

    def __init__(
        self,
        horizons=None,
        match: MatchConfig | None = None,
        regressor: RegressorSpec | None = None,
        cross_fit_folds: int | None = None,
    ):
        self.horizons = horizons
        self.match = match
        self.regressor = regressor
        self.cross_fit_folds = cross_fit_folds


class TargetedSyntheticControl(_PanelEstimatorMixin, BaseEstimator):
    """Matching weights retilted to zero the weighted control residuals."""

    _kind = TSC

    def __init__(
        self,
        horizons=None,
        match: MatchConfig | None = None,
        regressor: RegressorSpec | None = None,
        targeting: TargetingConfig | None = None,
        cross_fit_folds: int | None = None,
    ):
        self.horizons = horizons
        self.match = match
        self.regressor = regressor
        self.targeting = targeting
        self.cross_fit_folds = cross_fit_folds
