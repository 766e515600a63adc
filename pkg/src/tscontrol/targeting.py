"""One-dimensional targeted update of synthetic-control weights.

Starting from initial weights ``w0``, the weights are moved along an
exponential-tilting (softmax) submodel

    w_j(eps) = w0_j * exp(eps * s_j) / sum_k w0_k * exp(eps * s_k),

which preserves nonnegativity and the unit sum for every ``eps``. The tilt
parameter is chosen to zero the weighted control residuals

    f(eps) = sum_j w_j(eps) * (y_j - m_j),

where ``m_j`` are outcome-regression predictions for the controls.

Two score modes are supported:

* ``"residual"`` (default): tilt scores equal the residuals ``y - m``. Then
  ``f`` is the derivative of the convex function
  ``L(eps) = log sum_j w0_j exp(eps * (y_j - m_j))``, so it is nondecreasing
  in ``eps`` and a root exists exactly when the residuals (on the support of
  ``w0``) change sign. The default solver is bisection on a symmetric
  bracket; when no sign change exists, the boundary value minimizing ``|f|``
  is returned and flagged as clamped.
* ``"centered"``: tilt scores are the regression predictions centered to be
  mean-zero under ``w0``, and ``eps`` is updated by the fixed-step iteration
  ``eps <- eps - eta * f(eps)``.

Controls with ``w0_j = 0`` keep zero weight for every ``eps``; the tilt is
multiplicative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidBracketError, NonFiniteInputError
from .validation import as_float_array, check_finite, check_same_length, check_simplex

RESIDUAL = "residual"
CENTERED = "centered"

BISECTION = "bisection"
NEWTON = "newton"
GRADIENT = "gradient"

_MAX_BISECTION_ITERS = 200


@dataclass(frozen=True, eq=False)
class TiltScores:
    """Per-control tilt direction plus the mode it was built under."""

    s: np.ndarray
    mode: str

    def __post_init__(self):
        s = np.array(self.s, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "s", s)
        if self.mode not in (RESIDUAL, CENTERED):
            raise ConfigError(f"unknown score mode {self.mode!r}")


@dataclass(frozen=True)
class TargetingConfig:
    """Solver settings for the tilt parameter.

    ``eps_max`` bounds the search bracket; None resolves to 50 / max|s|
    (1 if all scores vanish) so the tilted exponents stay overflow-safe.
    ``eta`` and ``max_iters`` drive the fixed-step iteration used by the
    gradient method and by the centered score mode.
    """

    method: str = BISECTION
    score_mode: str = RESIDUAL
    tol: float = 1e-10
    eps_max: float | None = None
    eta: float = 0.1
    max_iters: int = 500

    def validate(self) -> "TargetingConfig":
        if self.method not in (BISECTION, NEWTON, GRADIENT):
            raise ConfigError(f"unknown targeting method {self.method!r}")
        if self.score_mode not in (RESIDUAL, CENTERED):
            raise ConfigError(f"unknown score mode {self.score_mode!r}")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.eps_max is not None and self.eps_max <= 0:
            raise InvalidBracketError(f"eps_max must be positive, got {self.eps_max}")
        if self.eta <= 0 or self.max_iters < 1:
            raise ConfigError("eta must be positive and max_iters >= 1")
        return self


@dataclass
class TargetingResult:
    """Solved tilt: parameter, targeted weights, and solver diagnostics.

    ``score_at_solution`` is the weighted residual sum evaluated with the
    returned weights; ``clamped`` marks a boundary return when no root exists
    in the bracket.
    """

    epsilon_hat: float
    targeted_weights: np.ndarray
    score_at_solution: float
    root_found: bool
    iterations: int
    clamped: bool


def compute_scores(model_preds, w0, mode: str, outcomes=None) -> TiltScores:
    """Build tilt scores from control predictions (and outcomes, if residual mode).

    In centered mode, ``s_j = m_j - sum_k w0_k m_k``, which is mean-zero under
    the initial weights. In residual mode, ``s_j = y_j - m_j`` and ``outcomes``
    must be supplied.
    """
    preds = as_float_array(model_preds, "model_preds", ndim=1)
    w = check_simplex(w0, name="w0")
    check_same_length(preds, w, "model predictions and weights")
    check_finite(preds, "model_preds")
    if mode == CENTERED:
        return TiltScores(preds - float(w @ preds), CENTERED)
    if mode == RESIDUAL:
        if outcomes is None:
            raise ConfigError("residual scores require control outcomes")
        y = as_float_array(outcomes, "outcomes", ndim=1)
        check_same_length(y, preds, "outcomes and predictions")
        check_finite(y, "outcomes")
        return TiltScores(y - preds, RESIDUAL)
    raise ConfigError(f"unknown score mode {mode!r}")


def tilt_weights(w0, scores, epsilon: float) -> np.ndarray:
    """Exponentially tilted weights ``w0 * exp(eps * s)``, renormalized.

    Computed with a max-shift on the active support for overflow safety;
    the output is always a valid simplex point and equals ``w0`` at eps=0.
    """
    w = check_simplex(w0, name="w0")
    s = scores.s if isinstance(scores, TiltScores) else as_float_array(scores, "scores", ndim=1)
    check_same_length(w, s, "weights and scores")
    check_finite(s, "scores")
    if not np.isfinite(epsilon):
        raise NonFiniteInputError(f"epsilon must be finite, got {epsilon}")
    if epsilon == 0.0:
        # Exact pass-through: the submodel at eps=0 is the initial weights.
        return w.copy()
    active = w > 0
    exponents = float(epsilon) * s
    shift = exponents[active].max()
    tilted = np.where(active, w * np.exp(exponents - shift), 0.0)
    return tilted / tilted.sum()


def score_equation(w_eps, residuals) -> float:
    """Weighted control residual sum ``sum_j w_j * r_j``."""
    w = as_float_array(w_eps, "weights", ndim=1)
    r = as_float_array(residuals, "residuals", ndim=1)
    check_same_length(w, r, "weights and residuals")
    return float(w @ r)


def default_eps_max(scores) -> float:
    s = scores.s if isinstance(scores, TiltScores) else np.asarray(scores, dtype=float)
    peak = float(np.max(np.abs(s))) if s.size else 0.0
    return 50.0 / peak if peak > 0 else 1.0


def solve_epsilon(
    w0, residuals, scores: TiltScores, config: TargetingConfig | None = None
) -> TargetingResult:
    """Solve ``f(eps) = 0`` for the tilt parameter.

    Residual score mode exploits monotonicity of ``f``: bisection (default)
    brackets on ``[-eps_max, eps_max]``; Newton uses the analytic derivative
    ``Var_w(r)`` safeguarded by the same bracket; the gradient method iterates
    ``eps <- eps - eta * f(eps)``. When residuals on the support of ``w0`` do
    not change sign no root exists, and the boundary minimizing ``|f|`` is
    returned with ``clamped=True``.

    Centered score mode always runs the fixed-step iteration, tilting by the
    centered scores while evaluating ``f`` with the residuals.
    """
    cfg = (config or TargetingConfig()).validate()
    w = check_simplex(w0, name="w0")
    r = as_float_array(residuals, "residuals", ndim=1)
    check_same_length(w, r, "weights and residuals")
    check_finite(r, "residuals")
    if not isinstance(scores, TiltScores):
        scores = TiltScores(as_float_array(scores, "scores", ndim=1), cfg.score_mode)
    check_same_length(w, scores.s, "weights and scores")
    eps_max = cfg.eps_max if cfg.eps_max is not None else default_eps_max(scores)
    if eps_max <= 0:
        raise InvalidBracketError(f"eps_max must be positive, got {eps_max}")

    def f(eps: float) -> float:
        return score_equation(tilt_weights(w, scores, eps), r)

    if scores.mode == CENTERED or cfg.method == GRADIENT:
        eps_hat, iterations = _fixed_step_iteration(f, cfg, eps_max)
    elif cfg.method == NEWTON:
        eps_hat, iterations = _newton(w, r, scores, cfg, eps_max, f)
    else:
        eps_hat, iterations = _bisection(f, cfg, eps_max)

    weights = tilt_weights(w, scores, eps_hat)
    value = score_equation(weights, r)
    return TargetingResult(
        epsilon_hat=float(eps_hat),
        targeted_weights=weights,
        score_at_solution=value,
        root_found=abs(value) <= cfg.tol,
        iterations=iterations,
        clamped=abs(eps_hat) == eps_max and abs(value) > cfg.tol,
    )


def _bisection(f, cfg: TargetingConfig, eps_max: float) -> tuple[float, int]:
    if abs(f(0.0)) <= cfg.tol:
        return 0.0, 0
    f_low = f(-eps_max)
    if abs(f_low) <= cfg.tol:
        return -eps_max, 1
    f_high = f(eps_max)
    if abs(f_high) <= cfg.tol:
        return eps_max, 1
    # f is nondecreasing under residual tilting, so a one-sided sign means
    # no root anywhere: the nearer boundary minimizes |f|.
    if f_low > 0:
        return -eps_max, 1
    if f_high < 0:
        return eps_max, 1
    low, high = -eps_max, eps_max
    mid = 0.0
    for iteration in range(1, _MAX_BISECTION_ITERS + 1):
        mid = 0.5 * (low + high)
        f_mid = f(mid)
        if abs(f_mid) <= cfg.tol:
            return mid, iteration
        if f_mid < 0:
            low = mid
        else:
            high = mid
    return mid, _MAX_BISECTION_ITERS


def _newton(w, r, scores, cfg: TargetingConfig, eps_max: float, f) -> tuple[float, int]:
    low, high = -eps_max, eps_max
    f_low, f_high = f(low), f(high)
    if abs(f_low) > cfg.tol and f_low > 0:
        return low, 1
    if abs(f_high) > cfg.tol and f_high < 0:
        return high, 1
    eps = 0.0
    value = f(eps)
    for iteration in range(1, cfg.max_iters + 1):
        if abs(value) <= cfg.tol:
            return eps, iteration - 1
        if value < 0:
            low = eps
        else:
            high = eps
        weights = tilt_weights(w, scores, eps)
        # d/d(eps) of sum_j w_j(eps) r_j is the tilted covariance of r and the
        # tilt scores; it reduces to Var_w(r) in residual mode.
        s = scores.s
        derivative = float(weights @ (r * s)) - value * float(weights @ s)
        if derivative > 1e-300:
            candidate = eps - value / derivative
        else:
            candidate = 0.5 * (low + high)
        if not low < candidate < high:
            candidate = 0.5 * (low + high)
        eps = candidate
        value = f(eps)
    return eps, cfg.max_iters


def _fixed_step_iteration(f, cfg: TargetingConfig, eps_max: float) -> tuple[float, int]:
    eps = 0.0
    iterations = 0
    for iterations in range(1, cfg.max_iters + 1):
        value = f(eps)
        if abs(value) <= cfg.tol:
            iterations -= 1
            break
        eps = float(np.clip(eps - cfg.eta * value, -eps_max, eps_max))
    return eps, iterations


def targeted_weights(
    w0, residuals, scores: TiltScores | None = None, config: TargetingConfig | None = None
) -> TargetingResult:
    """Solve for the tilt and return the targeted weights.

    When ``scores`` is omitted they are built from the configured score mode;
    in residual mode that is simply the residuals themselves.
    """
    cfg = (config or TargetingConfig()).validate()
    if scores is None:
        if cfg.score_mode != RESIDUAL:
            raise ConfigError("centered scores must be computed from model predictions")
        scores = TiltScores(as_float_array(residuals, "residuals", ndim=1), RESIDUAL)
    return solve_epsilon(w0, residuals, scores, cfg)
