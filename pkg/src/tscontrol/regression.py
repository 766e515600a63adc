"""Outcome-regression backends fitted on control units, one model per horizon.

Two backends are provided behind a common fit/predict surface:

* ``LinearOutcomeModel`` -- closed-form (ridge) least squares with intercept.
* ``MlpOutcomeModel`` -- a one-hidden-layer ReLU network with scalar output,
  trained by full-batch gradient descent on squared error at a fixed learning
  rate, with seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization.

Both are deterministic given (data, hyperparameters, seed).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .errors import (
    ConfigError,
    LengthMismatchError,
    SingularDesignWarning,
    TooFewControlsError,
)
from .validation import (
    SEED_STREAM_CROSSFIT,
    SEED_STREAM_FOLD,
    as_float_array,
    check_finite,
    derive_seed,
)

LINEAR = "linear"
MLP = "mlp"


@dataclass(frozen=True)
class RegressorSpec:
    """Configuration of an outcome-regression backend.

    The default mirrors the experimental setup this package reproduces:
    an MLP with 100 hidden units trained by full-batch SGD at learning rate
    1e-2 for 2000 steps. ``standardize_inputs=None`` resolves to True for the
    MLP (fixed-rate SGD on raw covariate scales is unstable) and False for
    the linear backend.
    """

    kind: str = MLP
    ridge: float = 0.0
    hidden_units: int = 100
    learning_rate: float = 1e-2
    steps: int = 2000
    seed: int = 0
    standardize_inputs: bool | None = None

    def validate(self) -> "RegressorSpec":
        if self.kind not in (LINEAR, MLP):
            raise ConfigError(f"unknown regressor kind {self.kind!r}")
        if self.ridge < 0:
            raise ConfigError("ridge must be nonnegative")
        if self.hidden_units < 1:
            raise ConfigError("hidden_units must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        return self

    @property
    def resolved_standardize(self) -> bool:
        if self.standardize_inputs is None:
            return self.kind == MLP
        return bool(self.standardize_inputs)


def _check_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = as_float_array(X, "X", ndim=2)
    y = as_float_array(y, "y", ndim=1)
    if X.shape[0] != y.size:
        raise LengthMismatchError(f"X has {X.shape[0]} rows but y has {y.size} entries")
    if X.shape[0] < 1:
        raise TooFewControlsError("need at least one training unit")
    check_finite(X, "X")
    check_finite(y, "y")
    return X, y


class _StandardizerMixin:
    """Per-feature z-scoring computed on the training units."""

    def _fit_standardizer(self, X: np.ndarray, enabled: bool) -> np.ndarray:
        if enabled:
            mean = X.mean(axis=0)
            sd = X.std(axis=0)
            sd = np.where(sd > 0, sd, 1.0)
        else:
            mean = np.zeros(X.shape[1])
            sd = np.ones(X.shape[1])
        self.input_mean_ = mean
        self.input_scale_ = sd
        return (X - mean) / sd

    def _apply_standardizer(self, X: np.ndarray) -> np.ndarray:
        return (X - self.input_mean_) / self.input_scale_

    def _check_predict_input(self, X) -> np.ndarray:
        if not hasattr(self, "n_features_in_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")
        X = as_float_array(X, "X")
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise LengthMismatchError(
                f"X has {X.shape[-1]} features, model was fitted with {self.n_features_in_}"
            )
        check_finite(X, "X")
        return X


class LinearOutcomeModel(_StandardizerMixin, RegressorMixin, BaseEstimator):
    """Least-squares outcome regression with optional ridge penalty.

    With ``ridge=0`` and a rank-deficient design the minimum-norm solution is
    used and a :class:`SingularDesignWarning` is emitted; the intercept is
    never penalized.
    """

    def __init__(self, ridge: float = 0.0, standardize_inputs: bool = False):
        self.ridge = ridge
        self.standardize_inputs = standardize_inputs

    def fit(self, X, y):
        X, y = _check_xy(X, y)
        if self.ridge < 0:
            raise ConfigError("ridge must be nonnegative")
        self.n_features_in_ = X.shape[1]
        Xs = self._fit_standardizer(X, self.standardize_inputs)
        design = np.column_stack([np.ones(len(y)), Xs])
        if self.ridge > 0:
            penalty = np.eye(design.shape[1])
            penalty[0, 0] = 0.0
            beta = np.linalg.solve(
                design.T @ design + self.ridge * penalty, design.T @ y
            )
        else:
            beta, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
            if rank < design.shape[1]:
                warnings.warn(
                    "rank-deficient design with ridge=0; using minimum-norm solution",
                    SingularDesignWarning,
                    stacklevel=2,
                )
        self.intercept_ = float(beta[0])
        self.coef_ = beta[1:]
        return self

    def predict(self, X):
        X = self._check_predict_input(X)
        return self._apply_standardizer(X) @ self.coef_ + self.intercept_


def _mlp_forward(params, X):
    w1, b1, w2, b2 = params
    pre = X @ w1 + b1
    hidden = np.maximum(pre, 0.0)
    return pre, hidden, hidden @ w2 + b2


def _mlp_loss_and_grads(params, X, y):
    """Mean squared error and its analytic gradients via backpropagation."""
    w1, b1, w2, b2 = params
    n = len(y)
    pre, hidden, pred = _mlp_forward(params, X)
    err = pred - y
    loss = float(err @ err) / n
    g_out = 2.0 * err / n
    g_w2 = hidden.T @ g_out
    g_b2 = float(g_out.sum())
    g_hidden = np.outer(g_out, w2)
    g_pre = g_hidden * (pre > 0)
    g_w1 = X.T @ g_pre
    g_b1 = g_pre.sum(axis=0)
    return loss, (g_w1, g_b1, g_w2, g_b2)


class MlpOutcomeModel(_StandardizerMixin, RegressorMixin, BaseEstimator):
    """One-hidden-layer ReLU regressor trained by full-batch gradient descent.

    Parameters are initialized uniformly in +-1/sqrt(fan_in) from a seeded
    generator, then updated for ``steps`` iterations at fixed
    ``learning_rate`` on the mean squared error. ``loss_curve_`` records the
    training loss before each update.

    ``standardize_inputs`` z-scores both the inputs and the targets on the
    training units (predictions are mapped back to the outcome scale). The
    fixed learning rate is only stable on a standardized problem; on raw
    outcome scales in the tens, full-batch descent at 1e-2 diverges.
    """

    def __init__(
        self,
        hidden_units: int = 100,
        learning_rate: float = 1e-2,
        steps: int = 2000,
        seed: int = 0,
        standardize_inputs: bool = True,
    ):
        self.hidden_units = hidden_units
        self.learning_rate = learning_rate
        self.steps = steps
        self.seed = seed
        self.standardize_inputs = standardize_inputs

    def fit(self, X, y):
        X, y = _check_xy(X, y)
        if self.hidden_units < 1 or self.steps < 1 or self.learning_rate <= 0:
            raise ConfigError("invalid MLP hyperparameters")
        self.n_features_in_ = X.shape[1]
        Xs = self._fit_standardizer(X, self.standardize_inputs)
        if self.standardize_inputs:
            self.target_mean_ = float(y.mean())
            scale = float(y.std())
            self.target_scale_ = scale if scale > 0 else 1.0
        else:
            self.target_mean_, self.target_scale_ = 0.0, 1.0
        y = (y - self.target_mean_) / self.target_scale_
        d, h = X.shape[1], int(self.hidden_units)
        rng = np.random.default_rng(self.seed)
        bound1 = 1.0 / np.sqrt(d)
        bound2 = 1.0 / np.sqrt(h)
        w1 = rng.uniform(-bound1, bound1, size=(d, h))
        b1 = rng.uniform(-bound1, bound1, size=h)
        w2 = rng.uniform(-bound2, bound2, size=h)
        b2 = float(rng.uniform(-bound2, bound2))
        lr = float(self.learning_rate)
        curve = []
        for _ in range(int(self.steps)):
            loss, (g_w1, g_b1, g_w2, g_b2) = _mlp_loss_and_grads((w1, b1, w2, b2), Xs, y)
            curve.append(loss)
            w1 = w1 - lr * g_w1
            b1 = b1 - lr * g_b1
            w2 = w2 - lr * g_w2
            b2 = b2 - lr * g_b2
        self.hidden_weights_ = w1
        self.hidden_bias_ = b1
        self.output_weights_ = w2
        self.output_bias_ = b2
        self.loss_curve_ = np.asarray(curve)
        return self

    def predict(self, X):
        X = self._check_predict_input(X)
        params = (self.hidden_weights_, self.hidden_bias_, self.output_weights_, self.output_bias_)
        raw = _mlp_forward(params, self._apply_standardizer(X))[2]
        return raw * self.target_scale_ + self.target_mean_


def fit_outcome_model(features, targets, spec: RegressorSpec | None = None, horizon: int | None = None):
    """Fit the configured backend on control units for one post-treatment horizon.

    Returns a fitted model carrying a ``horizon`` attribute for bookkeeping.
    """
    spec = (spec or RegressorSpec()).validate()
    if spec.kind == LINEAR:
        model = LinearOutcomeModel(
            ridge=spec.ridge, standardize_inputs=spec.resolved_standardize
        )
    else:
        model = MlpOutcomeModel(
            hidden_units=spec.hidden_units,
            learning_rate=spec.learning_rate,
            steps=spec.steps,
            seed=spec.seed,
            standardize_inputs=spec.resolved_standardize,
        )
    model.fit(features, targets)
    model.horizon = horizon
    model.spec = spec
    return model


def cross_fit_control_predictions(
    features, targets, spec: RegressorSpec | None = None, k_folds: int = 2
) -> np.ndarray:
    """Out-of-fold predictions for every control unit.

    Controls are partitioned into ``k_folds`` folds by a seeded shuffle; each
    control's prediction comes from a model fitted without its fold. Fold
    seeds are derived deterministically from the spec seed.
    """
    spec = (spec or RegressorSpec()).validate()
    X, y = _check_xy(features, targets)
    n = len(y)
    if k_folds < 2:
        raise ConfigError(f"k_folds must be >= 2, got {k_folds}")
    if n < k_folds:
        raise TooFewControlsError(f"need at least {k_folds} controls, got {n}")
    rng = np.random.default_rng(derive_seed(spec.seed, SEED_STREAM_CROSSFIT))
    folds = np.array_split(rng.permutation(n), k_folds)
    preds = np.empty(n)
    for fold_index, fold in enumerate(folds):
        train = np.setdiff1d(np.arange(n), fold)
        fold_spec = replace(spec, seed=derive_seed(spec.seed, SEED_STREAM_FOLD, fold_index))
        model = fit_outcome_model(X[train], y[train], fold_spec)
        preds[fold] = model.predict(X[fold])
    return preds
