"""Synthetic panel generators with known untreated ground truth.

Four outcome processes of increasing nonlinearity are provided -- linear,
hinge, quadratic, and a time-varying latent-factor process -- each an
additive combination of a time trend, a covariate term, a covariate-time
interaction, and Gaussian noise. Covariates are sampled uniformly per
coordinate on a fixed range. No treatment effect is injected: the generated
outcomes are untreated dynamics for every unit, so an estimator's error is
measured directly against the treated unit's own draw (or its noiseless
mean).

Binary panels are derived from the continuous latent values by min-max
normalizing the whole panel to success probabilities and sampling Bernoulli
outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateRangeError
from .panel import BINARY, CONTINUOUS, GroundTruth, PanelDataset
from .validation import SEED_STREAM_BINARIZE, derive_seed

LINEAR = "linear"
HINGE = "hinge"
QUADRATIC = "quadratic"
TIME_VARYING = "timevarying"
DGP_KINDS = (LINEAR, HINGE, QUADRATIC, TIME_VARYING)

_HINGE_T_KNOT = 10.0
_HINGE_COVARIATE_KNOT = 0.0
_FACTOR_SCALES = (2.0, 4.0, 1.0)


@dataclass(frozen=True)
class DgpConfig:
    """Generator settings; None fields resolve to per-kind defaults.

    The time-varying process defaults to a longer panel (T=100) and smaller
    noise (sd 0.8); the other kinds default to T=50 and unit noise.
    """

    kind: str = LINEAR
    n_units: int = 5
    horizon_T: int | None = None
    p: int = 12
    covariate_low: float = 0.0
    covariate_high: float = 10.0
    outcome: str = CONTINUOUS
    seed: int = 0
    noise_sd: float | None = None

    def validate(self) -> "DgpConfig":
        if self.kind not in DGP_KINDS:
            raise ConfigError(f"unknown dgp kind {self.kind!r}")
        if self.outcome not in (CONTINUOUS, BINARY):
            raise ConfigError(f"unknown outcome kind {self.outcome!r}")
        if self.n_units < 2:
            raise ConfigError("n_units must be >= 2")
        if self.resolved_T < 2:
            raise ConfigError("horizon_T must be >= 2")
        if self.p < 1:
            raise ConfigError("p must be >= 1")
        if not self.covariate_low < self.covariate_high:
            raise ConfigError("covariate range must have low < high")
        if self.resolved_noise_sd < 0:
            raise ConfigError("noise_sd must be nonnegative")
        return self

    @property
    def resolved_T(self) -> int:
        if self.horizon_T is not None:
            return int(self.horizon_T)
        return 100 if self.kind == TIME_VARYING else 50

    @property
    def resolved_noise_sd(self) -> float:
        if self.noise_sd is not None:
            return float(self.noise_sd)
        return 0.8 if self.kind == TIME_VARYING else 1.0


def _linear_mean(X: np.ndarray, t: np.ndarray) -> np.ndarray:
    sx = X.sum(axis=1)
    trend = 0.05 * t
    unit = 0.02 * sx
    interaction = 0.1 * sx[:, None] + 0.05 * t[None, :] + 0.004 * sx[:, None] * t[None, :]
    return trend[None, :] + unit[:, None] + interaction


def _hinge_mean(X: np.ndarray, t: np.ndarray) -> np.ndarray:
    sx = X.sum(axis=1)
    mx = X.mean(axis=1)
    t_kink = np.maximum(t - _HINGE_T_KNOT, 0.0)
    trend = 0.03 * t + 0.04 * t_kink
    unit = 0.1 * sx + 0.15 * np.maximum(sx - _HINGE_COVARIATE_KNOT, 0.0)
    interaction = 0.1 * mx[:, None] + 0.04 * t[None, :] + 0.02 * mx[:, None] * t_kink[None, :]
    return trend[None, :] + unit[:, None] + interaction


def _quadratic_mean(X: np.ndarray, t: np.ndarray) -> np.ndarray:
    mx = X.mean(axis=1)
    centered = X - mx[:, None]
    # The centered linear term sums to zero by construction; kept for
    # fidelity to the stated per-coordinate form.
    unit = (0.1 * centered + 0.03 * centered**2).sum(axis=1)
    trend = 0.04 * t + 0.002 * t**2
    interaction = (
        0.1 * mx[:, None]
        + 0.05 * t[None, :]
        + 0.01 * mx[:, None] * t[None, :]
        + 0.005 * (mx**2)[:, None]
    )
    return trend[None, :] + unit[:, None] + interaction


def linear_mean(x, t) -> float:
    """Noiseless linear-process mean for one unit at 1-based time t."""
    return float(_linear_mean(np.atleast_2d(np.asarray(x, dtype=float)), np.array([float(t)]))[0, 0])


def hinge_mean(x, t) -> float:
    """Noiseless hinge-process mean for one unit at 1-based time t."""
    return float(_hinge_mean(np.atleast_2d(np.asarray(x, dtype=float)), np.array([float(t)]))[0, 0])


def quadratic_mean(x, t) -> float:
    """Noiseless quadratic-process mean for one unit at 1-based time t."""
    return float(
        _quadratic_mean(np.atleast_2d(np.asarray(x, dtype=float)), np.array([float(t)]))[0, 0]
    )


@dataclass(frozen=True, eq=False)
class TimeVaryingState:
    """Latent structure of the factor process: loadings, unit effects, length."""

    loadings: np.ndarray
    unit_effects: np.ndarray
    n_periods: int


def factor_basis(tau: np.ndarray) -> np.ndarray:
    """The three time bases evaluated on rescaled time tau in [0, 1]; shape (3, len)."""
    tau = np.asarray(tau, dtype=float)
    return np.stack(
        [tau - 0.5, (tau - 0.5) ** 2 - 1.0 / 12.0, np.sin(2.0 * np.pi * tau)]
    )


def build_time_varying_state(X: np.ndarray, xi: np.ndarray, n_periods: int) -> TimeVaryingState:
    """Standardize covariates and build sparse-loading factor structure.

    Loading columns are rescaled to sample standard deviations (2, 4, 1);
    the treated unit's loading on the second factor is then shifted by +2 so
    its trajectory is not a trivial mixture of the controls'.
    """
    n, p = X.shape
    mean = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1)
    z = (X - mean) / (sd + 1e-6)
    a = np.zeros(p)
    a[: min(3, p)] = [0.6, -0.4, 0.3][: min(3, p)]
    mu = z @ a + 0.8 * xi
    theta = np.zeros((3, p))
    rows = [(0, [1.0, -0.6, 0.4]), (1, [1.2, -0.5, 0.3]), (2, [0.8, 0.4, -0.7])]
    for row, values in rows:
        start = row * 3
        stop = min(start + 3, p)
        theta[row, start:stop] = values[: stop - start]
    loadings = z @ theta.T
    for column, scale in enumerate(_FACTOR_SCALES):
        col_sd = loadings[:, column].std(ddof=1)
        if col_sd > 0:
            loadings[:, column] = scale * loadings[:, column] / col_sd
    loadings[0, 1] += 2.0
    return TimeVaryingState(loadings=loadings, unit_effects=mu, n_periods=int(n_periods))


def _time_varying_mean(state: TimeVaryingState, t: np.ndarray) -> np.ndarray:
    tau = (t - 1.0) / (state.n_periods - 1.0)
    trend = 2.0 + 18.0 * tau + 14.0 * tau**2
    basis = factor_basis(tau)
    return state.unit_effects[:, None] + trend[None, :] + state.loadings @ basis


def time_varying_mean(state: TimeVaryingState, unit: int, t) -> float:
    """Noiseless factor-process mean for one unit at 1-based time t."""
    return float(_time_varying_mean(state, np.array([float(t)]))[unit, 0])


_MEAN_FUNCS = {LINEAR: _linear_mean, HINGE: _hinge_mean, QUADRATIC: _quadratic_mean}


@dataclass(frozen=True, eq=False)
class DgpDraw:
    """Everything sampled for one panel: latent means, noise, and outcomes.

    For binary panels ``probabilities`` holds the min-max normalized latent
    values and ``outcomes`` the Bernoulli draws; otherwise ``outcomes`` are
    the latent values themselves and ``probabilities`` is None.
    """

    covariates: np.ndarray
    mean: np.ndarray
    noise: np.ndarray
    latent: np.ndarray
    outcomes: np.ndarray
    probabilities: np.ndarray | None
    factor_state: TimeVaryingState | None


def draw_components(config: DgpConfig) -> DgpDraw:
    """Sample one panel's latent components; deterministic given the seed."""
    cfg = config.validate()
    n, p, T = cfg.n_units, cfg.p, cfg.resolved_T
    rng = np.random.default_rng(cfg.seed)
    X = rng.uniform(cfg.covariate_low, cfg.covariate_high, size=(n, p))
    # Fixed draw order (covariates, unit effects, noise) keeps panels
    # bit-reproducible across config variations that share a seed.
    state = None
    t_grid = np.arange(1, T + 1, dtype=float)
    if cfg.kind == TIME_VARYING:
        xi = rng.standard_normal(n)
        state = build_time_varying_state(X, xi, T)
        mean = _time_varying_mean(state, t_grid)
    else:
        mean = _MEAN_FUNCS[cfg.kind](X, t_grid)
    noise = rng.normal(0.0, cfg.resolved_noise_sd, size=(n, T))
    latent = mean + noise
    probabilities = None
    outcomes = latent
    if cfg.outcome == BINARY:
        probabilities = _min_max_probabilities(latent)
        draw_rng = np.random.default_rng(derive_seed(cfg.seed, SEED_STREAM_BINARIZE))
        outcomes = (draw_rng.random(size=latent.shape) < probabilities).astype(float)
    return DgpDraw(
        covariates=X,
        mean=mean,
        noise=noise,
        latent=latent,
        outcomes=outcomes,
        probabilities=probabilities,
        factor_state=state,
    )


def _min_max_probabilities(latent: np.ndarray) -> np.ndarray:
    low, high = float(latent.min()), float(latent.max())
    if high == low:
        raise DegenerateRangeError("latent panel is constant; min-max normalization undefined")
    return (latent - low) / (high - low)


def gen_panel(config: DgpConfig, t0: int) -> PanelDataset:
    """Generate a panel with the treated unit in row 0 and ground truth attached.

    ``t0`` only places the treatment time and slices the ground truth; the
    sampled values are identical for every ``t0`` under the same seed.
    """
    cfg = config.validate()
    if not 1 <= int(t0) <= cfg.resolved_T - 1:
        raise ConfigError(f"t0={t0} outside valid range [1, {cfg.resolved_T - 1}]")
    draw = draw_components(cfg)
    t0 = int(t0)
    if cfg.outcome == BINARY:
        truth = GroundTruth(draw.outcomes[0, t0:], draw.probabilities[0, t0:])
    else:
        truth = GroundTruth(draw.outcomes[0, t0:], draw.mean[0, t0:])
    return PanelDataset(
        outcomes=draw.outcomes,
        covariates=draw.covariates,
        treated_index=0,
        t0=t0,
        outcome_kind=cfg.outcome,
        ground_truth=truth,
        unit_ids=tuple(f"u{i}" for i in range(cfg.n_units)),
        time_labels=tuple(str(t) for t in range(1, cfg.resolved_T + 1)),
    )


def binarize(panel: PanelDataset, seed: int) -> PanelDataset:
    """Map a continuous panel to binary outcomes via min-max probabilities.

    Probabilities are computed over the entire panel's values; the ground
    truth stores the treated unit's post-treatment probabilities alongside
    the realized draws.
    """
    if panel.is_binary:
        raise ConfigError("panel is already binary")
    probabilities = _min_max_probabilities(panel.outcomes)
    rng = np.random.default_rng(seed)
    draws = (rng.random(size=probabilities.shape) < probabilities).astype(float)
    treated = panel.treated_index
    truth = GroundTruth(draws[treated, panel.t0 :], probabilities[treated, panel.t0 :])
    return PanelDataset(
        outcomes=draws,
        covariates=panel.covariates,
        treated_index=treated,
        t0=panel.t0,
        outcome_kind=BINARY,
        ground_truth=truth,
        unit_ids=panel.unit_ids,
        time_labels=panel.time_labels,
    )
