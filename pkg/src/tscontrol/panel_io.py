"""CSV ingestion and serialization for panel datasets.

Two schemas are supported. Wide: one row per unit with columns
``id, z_1..z_p, y_<label>...``. Long: one row per (unit, time) cell with
columns ``unit, time, outcome, z_1..z_p`` where covariates repeat per unit
and must be constant within it. Files are UTF-8 with a header row and ``.``
as the decimal separator. Floats are written with ``repr`` so round-trips
are bit-exact.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    CovariateNotConstantError,
    PanelParseError,
    RaggedPanelError,
)
from .panel import CONTINUOUS, PanelDataset, validate_panel

WIDE = "wide"
LONG = "long"

_ID_COLUMNS = ("id", "unit")


def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_float(cell: str, where: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise PanelParseError(f"cannot parse {cell!r} as a number in {where}") from None


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise PanelParseError(f"{path}: file is empty")
    header, data = rows[0], rows[1:]
    if not data:
        raise PanelParseError(f"{path}: no data rows")
    width = len(header)
    for i, row in enumerate(data):
        if len(row) != width:
            raise PanelParseError(f"{path}: row {i + 2} has {len(row)} cells, expected {width}")
    return header, data


def _resolve_treated(treated, unit_ids: list[str]) -> int:
    if isinstance(treated, str):
        if treated not in unit_ids:
            raise ConfigError(f"treated unit {treated!r} not found among units")
        return unit_ids.index(treated)
    index = int(treated)
    if not 0 <= index < len(unit_ids):
        raise ConfigError(f"treated index {index} outside unit range [0, {len(unit_ids)})")
    return index


def _resolve_t0(t0, time_labels: list[str]) -> int:
    """Treatment time as a pre-period count, or as the label of the first treated period.

    Integer-like values inside the feasible pre-count range [1, T-1] are read
    as counts; anything else is matched against the time labels.
    """
    if t0 is None:
        raise ConfigError("t0 is required to load a panel")
    if not isinstance(t0, str):
        return int(t0)
    try:
        count = int(t0)
    except ValueError:
        count = None
    if count is not None and 1 <= count <= len(time_labels) - 1:
        return count
    if t0 in time_labels:
        return time_labels.index(t0)
    if count is not None:
        return count  # out-of-range count; panel validation reports it
    raise ConfigError(f"t0 {t0!r} is neither an integer nor a known time label")


def load_panel_csv(
    path,
    schema: str = WIDE,
    *,
    treated=0,
    t0=None,
    outcome_kind: str = CONTINUOUS,
    bounds: tuple[float, float] | None = None,
) -> PanelDataset:
    """Load a panel from CSV; the treated unit and t0 come from the caller.

    ``treated`` may be a unit id or a row index; ``t0`` may be a pre-period
    count or a time label (the first treated period).
    """
    if schema == WIDE:
        unit_ids, time_labels, covariates, outcomes, _ = _load_wide(path)
    elif schema == LONG:
        unit_ids, time_labels, covariates, outcomes = _load_long(path)
    else:
        raise ConfigError(f"unknown schema {schema!r}")
    panel = PanelDataset(
        outcomes=outcomes,
        covariates=covariates,
        treated_index=_resolve_treated(treated, unit_ids),
        t0=_resolve_t0(t0, time_labels),
        outcome_kind=outcome_kind,
        bounds=bounds,
        unit_ids=tuple(unit_ids),
        time_labels=tuple(time_labels),
    )
    return validate_panel(panel)


def _load_wide(path):
    header, data = _read_rows(path)
    if header[0].strip().lower() not in _ID_COLUMNS:
        raise PanelParseError(f"{path}: wide schema needs a leading 'id' or 'unit' column")
    covariate_cols = [i for i, name in enumerate(header) if name.startswith("z_")]
    time_cols = [i for i, name in enumerate(header) if name.startswith("y_")]
    if not time_cols:
        raise PanelParseError(f"{path}: no y_* time columns found")
    unknown = [name for i, name in enumerate(header[1:], start=1)
               if i not in covariate_cols and i not in time_cols]
    if unknown:
        raise PanelParseError(f"{path}: unrecognized column(s) {unknown}; expected z_* or y_*")
    time_labels = [header[i][2:] for i in time_cols]
    unit_ids, covariates, outcomes = [], [], []
    for row in data:
        if row[0] in unit_ids:
            raise PanelParseError(f"{path}: duplicate unit id {row[0]!r}")
        unit_ids.append(row[0])
        for i in covariate_cols + time_cols:
            if row[i].strip() == "":
                raise RaggedPanelError(f"{path}: missing cell for unit {row[0]!r}, column {header[i]!r}")
        covariates.append([_parse_float(row[i], f"unit {row[0]!r}") for i in covariate_cols])
        outcomes.append([_parse_float(row[i], f"unit {row[0]!r}") for i in time_cols])
    covariate_names = [header[i] for i in covariate_cols]
    return unit_ids, time_labels, np.array(covariates).reshape(len(unit_ids), -1), np.array(outcomes), covariate_names


def _load_long(path):
    header, data = _read_rows(path)
    required = ["unit", "time", "outcome"]
    positions = {}
    for name in required:
        if name not in header:
            raise PanelParseError(f"{path}: long schema requires a {name!r} column")
        positions[name] = header.index(name)
    covariate_cols = [i for i, name in enumerate(header) if name.startswith("z_")]
    unknown = [name for i, name in enumerate(header)
               if name not in required and i not in covariate_cols]
    if unknown:
        raise PanelParseError(f"{path}: unrecognized column(s) {unknown}; expected z_*")

    unit_ids: list[str] = []
    cells: dict[tuple[str, str], float] = {}
    unit_covariates: dict[str, list[float]] = {}
    time_seen: list[str] = []
    for row in data:
        unit = row[positions["unit"]]
        time = row[positions["time"]]
        if unit not in unit_ids:
            unit_ids.append(unit)
        if time not in time_seen:
            time_seen.append(time)
        key = (unit, time)
        if key in cells:
            raise PanelParseError(f"{path}: duplicate cell for unit {unit!r} at time {time!r}")
        cells[key] = _parse_float(row[positions["outcome"]], f"({unit}, {time})")
        covs = [_parse_float(row[i], f"({unit}, {time}) covariate") for i in covariate_cols]
        if unit in unit_covariates:
            if unit_covariates[unit] != covs:
                raise CovariateNotConstantError(
                    f"{path}: covariates vary within unit {unit!r}"
                )
        else:
            unit_covariates[unit] = covs

    time_labels = _sorted_labels(time_seen)
    outcomes = np.empty((len(unit_ids), len(time_labels)))
    for i, unit in enumerate(unit_ids):
        for j, time in enumerate(time_labels):
            if (unit, time) not in cells:
                raise RaggedPanelError(f"{path}: missing cell for unit {unit!r} at time {time!r}")
            outcomes[i, j] = cells[(unit, time)]
    covariates = np.array([unit_covariates[u] for u in unit_ids]).reshape(len(unit_ids), -1)
    return unit_ids, time_labels, covariates, outcomes


def _sorted_labels(labels: list[str]) -> list[str]:
    try:
        return sorted(labels, key=float)
    except ValueError:
        return sorted(labels)


def write_panel_csv(panel: PanelDataset, path, schema: str = WIDE) -> None:
    """Serialize a panel to CSV; inverse of :func:`load_panel_csv`."""
    panel = validate_panel(panel)
    path = Path(path)
    units = panel.unit_labels
    times = panel.time_labels or tuple(str(t + 1) for t in range(panel.n_periods))
    p = panel.n_covariates
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        if schema == WIDE:
            writer.writerow(
                ["id"]
                + [f"z_{k + 1}" for k in range(p)]
                + [f"y_{label}" for label in times]
            )
            for i, unit in enumerate(units):
                writer.writerow(
                    [unit]
                    + [_fmt(v) for v in panel.covariates[i]]
                    + [_fmt(v) for v in panel.outcomes[i]]
                )
        elif schema == LONG:
            writer.writerow(["unit", "time", "outcome"] + [f"z_{k + 1}" for k in range(p)])
            for i, unit in enumerate(units):
                covs = [_fmt(v) for v in panel.covariates[i]]
                for j, label in enumerate(times):
                    writer.writerow([unit, label, _fmt(panel.outcomes[i, j])] + covs)
        else:
            raise ConfigError(f"unknown schema {schema!r}")
