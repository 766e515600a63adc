"""Panel data model for single-treated-unit studies.

A :class:`PanelDataset` holds an N x T outcome matrix, optional time-invariant
unit covariates, the index of the treated unit, and the treatment time ``t0``.
Time is positional and 0-based internally: columns ``0 .. t0-1`` are
pre-treatment, columns ``t0 .. T-1`` are post-treatment. Calendar labels, when
present, are metadata only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidT0Error,
    NoControlsError,
    NonBinaryValueError,
    NonFiniteInputError,
    OutOfBoundsError,
)

CONTINUOUS = "continuous"
BINARY = "binary"


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Untreated potential outcomes of the treated unit over post-treatment times.

    ``realized`` is the drawn (noisy) untreated trajectory; ``noiseless`` is
    its mean (for binary panels, the success probability per period).
    """

    realized: np.ndarray
    noiseless: np.ndarray

    def __post_init__(self):
        for field in ("realized", "noiseless"):
            arr = np.array(getattr(self, field), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, field, arr)


@dataclass(frozen=True, eq=False)
class PanelDataset:
    """Immutable panel of outcomes and covariates with a single treated unit.

    Parameters
    ----------
    outcomes : array, shape (N, T)
        Outcome trajectories, one row per unit.
    covariates : array, shape (N, p) or None
        Time-invariant baseline covariates; ``p`` may be zero.
    treated_index : int
        Row of the treated unit. All other rows are controls.
    t0 : int
        Number of pre-treatment periods; treatment applies from column ``t0``.
    outcome_kind : {"continuous", "binary"}
    bounds : (low, high) or None
        Optional declared outcome bounds for the control units.
    ground_truth : GroundTruth or None
        Present only for simulated panels.
    unit_ids, time_labels : tuples of str or None
        Display metadata; never used in computation.
    """

    outcomes: np.ndarray
    covariates: np.ndarray | None = None
    treated_index: int = 0
    t0: int = 1
    outcome_kind: str = CONTINUOUS
    bounds: tuple[float, float] | None = None
    ground_truth: GroundTruth | None = None
    unit_ids: tuple[str, ...] | None = None
    time_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        outcomes = np.array(self.outcomes, dtype=float)
        outcomes.setflags(write=False)
        object.__setattr__(self, "outcomes", outcomes)
        if self.covariates is None:
            n = outcomes.shape[0] if outcomes.ndim == 2 else 0
            covariates = np.zeros((n, 0))
        else:
            covariates = np.array(self.covariates, dtype=float)
        covariates.setflags(write=False)
        object.__setattr__(self, "covariates", covariates)
        object.__setattr__(self, "treated_index", int(self.treated_index))
        object.__setattr__(self, "t0", int(self.t0))
        if self.unit_ids is not None:
            object.__setattr__(self, "unit_ids", tuple(str(u) for u in self.unit_ids))
        if self.time_labels is not None:
            object.__setattr__(self, "time_labels", tuple(str(t) for t in self.time_labels))
        if self.bounds is not None:
            object.__setattr__(self, "bounds", (float(self.bounds[0]), float(self.bounds[1])))

    @property
    def n_units(self) -> int:
        return self.outcomes.shape[0]

    @property
    def n_periods(self) -> int:
        return self.outcomes.shape[1]

    @property
    def n_covariates(self) -> int:
        return self.covariates.shape[1]

    @property
    def n_post_periods(self) -> int:
        return self.n_periods - self.t0

    @property
    def control_indices(self) -> np.ndarray:
        """Indices of all control units, in ascending unit order."""
        return np.array([i for i in range(self.n_units) if i != self.treated_index])

    @property
    def unit_labels(self) -> tuple[str, ...]:
        if self.unit_ids is not None:
            return self.unit_ids
        return tuple(f"u{i}" for i in range(self.n_units))

    @property
    def is_binary(self) -> bool:
        return self.outcome_kind == BINARY

    def time_index(self, horizon: int) -> int:
        """0-based outcome column for post-treatment step ``horizon`` (1-based)."""
        return self.t0 + int(horizon) - 1

    def control_outcomes_at(self, horizon: int) -> np.ndarray:
        return self.outcomes[self.control_indices, self.time_index(horizon)]


def validate_panel(panel: PanelDataset) -> PanelDataset:
    """Check all structural invariants of a panel; returns the panel unchanged.

    Raises
    ------
    DimensionMismatchError, NoControlsError, InvalidT0Error,
    NonFiniteInputError, NonBinaryValueError, OutOfBoundsError
    """
    y = panel.outcomes
    if y.ndim != 2:
        raise DimensionMismatchError(f"outcomes must be a 2-D matrix, got shape {y.shape}")
    n, t = y.shape
    if n < 2:
        raise NoControlsError(f"need at least one control unit, got N={n}")
    if t < 2:
        raise InvalidT0Error(f"need at least two periods, got T={t}")
    z = panel.covariates
    if z.ndim != 2 or z.shape[0] != n:
        raise DimensionMismatchError(
            f"covariates shape {z.shape} inconsistent with N={n} units"
        )
    if not 0 <= panel.treated_index < n:
        raise DimensionMismatchError(
            f"treated_index {panel.treated_index} outside unit range [0, {n})"
        )
    if not 1 <= panel.t0 <= t - 1:
        raise InvalidT0Error(f"t0={panel.t0} outside valid range [1, {t - 1}]")
    if not np.all(np.isfinite(y)):
        raise NonFiniteInputError("outcomes contain NaN or infinite values")
    if not np.all(np.isfinite(z)):
        raise NonFiniteInputError("covariates contain NaN or infinite values")
    if panel.outcome_kind not in (CONTINUOUS, BINARY):
        raise DimensionMismatchError(f"unknown outcome kind {panel.outcome_kind!r}")
    if panel.is_binary and not np.all((y == 0.0) | (y == 1.0)):
        bad = y[(y != 0.0) & (y != 1.0)].flat[0]
        raise NonBinaryValueError(f"binary panel contains non-binary value {bad}")
    if panel.bounds is not None:
        low, high = panel.bounds
        if not low < high:
            raise OutOfBoundsError(f"declared bounds ({low}, {high}) must satisfy low < high")
        controls = y[panel.control_indices]
        if controls.min() < low or controls.max() > high:
            raise OutOfBoundsError(
                f"control outcomes exceed declared bounds ({low}, {high}): "
                f"observed range ({controls.min()}, {controls.max()})"
            )
    if panel.unit_ids is not None and len(panel.unit_ids) != n:
        raise DimensionMismatchError("unit_ids length does not match number of units")
    if panel.time_labels is not None and len(panel.time_labels) != t:
        raise DimensionMismatchError("time_labels length does not match number of periods")
    if panel.ground_truth is not None:
        post = panel.n_post_periods
        gt = panel.ground_truth
        if len(gt.realized) != post or len(gt.noiseless) != post:
            raise DimensionMismatchError(
                f"ground truth length must equal {post} post-treatment periods"
            )
    return panel


def build_features(panel: PanelDataset) -> np.ndarray:
    """Per-unit matching features: covariates followed by pre-treatment outcomes.

    Returns an (N, p + t0) matrix whose row i is unit i's feature vector.
    """
    return np.concatenate([panel.covariates, panel.outcomes[:, : panel.t0]], axis=1)


def treated_and_control_features(panel: PanelDataset) -> tuple[np.ndarray, np.ndarray]:
    """Feature vector of the treated unit and feature matrix of the controls."""
    feats = build_features(panel)
    return feats[panel.treated_index], feats[panel.control_indices]


def horizon_bounds(panel: PanelDataset, horizon: int) -> tuple[float, float]:
    """Outcome bounds used for violation reporting at a post-treatment step.

    Declared bounds win; binary panels default to [0, 1]; otherwise the
    observed control-outcome range at that period is used.
    """
    if panel.bounds is not None:
        return panel.bounds
    if panel.is_binary:
        return (0.0, 1.0)
    controls = panel.control_outcomes_at(horizon)
    return (float(controls.min()), float(controls.max()))
