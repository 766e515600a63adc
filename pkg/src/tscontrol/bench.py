"""Benchmark harness: RMSE tables, boundedness report, weight snapshots.

The evaluation protocol runs a grid of data generators against a list of
estimators. For each (generator, seed, horizon) cell the treatment time is
placed ``horizon`` steps before the end of the panel, every estimator sees
the same generated panel, and the error is the RMSE of the counterfactual
over post-treatment steps ``1..horizon`` against the treated unit's known
untreated outcomes. Results aggregate to mean +- standard error over seeds.

Cells that raise are recorded with their error message and rendered as
missing, never silently dropped.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .dgp import DgpConfig, gen_panel
from .errors import ConfigError, EmptyInputError, LengthMismatchError
from .estimators import TSC, EstimatorConfig, EstimatorResult, _NuisanceCache, estimate
from .panel import PanelDataset
from .svg import grouped_bar_chart, trajectory_chart
from .validation import SEED_STREAM_MODEL, SEED_STREAM_PANEL, derive_seed

REALIZED = "realized"
NOISELESS = "noiseless"

_ESTIMATOR_COLORS = {
    "classical_sc": "#e08214",
    "plugin": "#8073ac",
    "augmented_sc": "#2166ac",
    "tsc": "#1a9850",
}


def default_estimator_grid() -> tuple[EstimatorConfig, ...]:
    return tuple(EstimatorConfig(kind=k) for k in ("classical_sc", "plugin", "augmented_sc", "tsc"))


def default_dgp_grid(outcomes=("continuous", "binary")) -> tuple[DgpConfig, ...]:
    kinds = ("linear", "hinge", "quadratic", "timevarying")
    return tuple(DgpConfig(kind=k, outcome=o) for o in outcomes for k in kinds)


@dataclass(frozen=True)
class BenchPlan:
    """What to run: generator grid x estimators x horizons x seeds."""

    dgps: tuple[DgpConfig, ...] = field(default_factory=default_dgp_grid)
    estimators: tuple[EstimatorConfig, ...] = field(default_factory=default_estimator_grid)
    horizons: tuple[int, ...] = (1, 5, 10)
    n_seeds: int = 5
    base_seed: int = 0
    ground_truth: str = REALIZED

    def validate(self) -> "BenchPlan":
        if self.n_seeds < 1:
            raise ConfigError("n_seeds must be >= 1")
        if not self.horizons:
            raise ConfigError("horizons must be nonempty")
        if self.ground_truth not in (REALIZED, NOISELESS):
            raise ConfigError(f"unknown ground truth mode {self.ground_truth!r}")
        if not self.dgps or not self.estimators:
            raise ConfigError("plan needs at least one dgp and one estimator")
        for d in self.dgps:
            d.validate()
        for h in self.horizons:
            for d in self.dgps:
                if int(h) >= d.resolved_T:
                    raise ConfigError(f"horizon {h} too large for T={d.resolved_T}")
        for e in self.estimators:
            e.validate()
        return self


def estimator_labels(plan: BenchPlan) -> list[str]:
    """Stable unique labels for the plan's estimators (kind, deduplicated)."""
    labels = []
    for cfg in plan.estimators:
        label = cfg.kind
        if label in labels:
            suffix = 2
            while f"{label}_{suffix}" in labels:
                suffix += 1
            label = f"{label}_{suffix}"
        labels.append(label)
    return labels


@dataclass
class EstimatorCell:
    """One estimator's output on one (dgp, seed, horizon) cell."""

    psi: np.ndarray | None = None
    rmse: float | None = None
    error: str | None = None
    bounds_lower: np.ndarray | None = None
    bounds_upper: np.ndarray | None = None
    pretreatment_fit: float | None = None
    initial_weights: np.ndarray | None = None
    final_weights: np.ndarray | None = None
    targeting: list[dict] | None = None


@dataclass
class CellResult:
    """One (dgp, seed, horizon) experiment with all estimators' outputs."""

    dgp_index: int
    dgp_kind: str
    outcome: str
    seed_index: int
    horizon: int
    t0: int
    truth: np.ndarray
    outcomes: np.ndarray
    treated_index: int
    control_ids: tuple[str, ...]
    estimators: dict[str, EstimatorCell] = field(default_factory=dict)

    @property
    def run_id(self) -> str:
        return f"{self.dgp_kind}_{self.outcome}_h{self.horizon}_s{self.seed_index}"


@dataclass
class BenchReport:
    plan: BenchPlan
    cells: list[CellResult]

    def rmse_table(self) -> list[dict]:
        """Rows of mean +- stderr RMSE per (dgp, outcome, horizon, estimator)."""
        labels = estimator_labels(self.plan)
        rows = []
        for dgp_index, dgp in enumerate(self.plan.dgps):
            for horizon in self.plan.horizons:
                for label in labels:
                    values = [
                        cell.estimators[label].rmse
                        for cell in self.cells
                        if cell.dgp_index == dgp_index
                        and cell.horizon == horizon
                        and cell.estimators[label].rmse is not None
                    ]
                    n_missing = self.plan.n_seeds - len(values)
                    rows.append(
                        {
                            "dgp": dgp.kind,
                            "outcome": dgp.outcome,
                            "horizon": horizon,
                            "estimator": label,
                            "mean_rmse": float(np.mean(values)) if values else None,
                            "stderr_rmse": _stderr(values),
                            "n_seeds": len(values),
                            "n_missing": n_missing,
                        }
                    )
        return rows

    def violation_table(self) -> list[dict]:
        """Percent of counterfactual values outside bounds, per side."""
        labels = estimator_labels(self.plan)
        rows = []
        for dgp_index, dgp in enumerate(self.plan.dgps):
            for label in labels:
                upper = lower = total = 0
                for cell in self.cells:
                    if cell.dgp_index != dgp_index:
                        continue
                    est = cell.estimators[label]
                    if est.psi is None:
                        continue
                    total += len(est.psi)
                    upper += int(np.sum(est.psi > est.bounds_upper))
                    lower += int(np.sum(est.psi < est.bounds_lower))
                for side, count in (("upper", upper), ("lower", lower)):
                    rows.append(
                        {
                            "dgp": dgp.kind,
                            "outcome": dgp.outcome,
                            "estimator": label,
                            "bound": side,
                            "violation_pct": 100.0 * count / total if total else None,
                            "n_values": total,
                        }
                    )
        return rows


def _stderr(values) -> float | None:
    if not values:
        return None
    if len(values) == 1:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(len(values)))


def rmse(estimates, truths) -> float:
    """Root mean squared error between two equal-length vectors."""
    est = np.asarray(estimates, dtype=float)
    tru = np.asarray(truths, dtype=float)
    if est.size == 0:
        raise EmptyInputError("rmse of empty vectors is undefined")
    if est.shape != tru.shape:
        raise LengthMismatchError(f"lengths differ: {est.shape} vs {tru.shape}")
    return float(np.sqrt(np.mean((est - tru) ** 2)))


def violation_rate(results: list[EstimatorResult], bounds) -> tuple[float, float]:
    """(upper_pct, lower_pct) of per-horizon counterfactuals outside fixed bounds."""
    low, high = float(bounds[0]), float(bounds[1])
    values = [e.psi_hat for r in results for e in r.estimates]
    if not values:
        raise EmptyInputError("no estimates to compute violation rates over")
    values = np.asarray(values)
    upper = 100.0 * float(np.mean(values > high))
    lower = 100.0 * float(np.mean(values < low))
    return upper, lower


def _select_truth(panel: PanelDataset, mode: str, horizon: int) -> np.ndarray:
    truth = panel.ground_truth
    if truth is None:
        raise ConfigError("benchmark panels must carry ground truth")
    series = truth.realized if mode == REALIZED else truth.noiseless
    return np.asarray(series[:horizon])


def _run_job(args) -> list[CellResult]:
    """All horizons x estimators for one (dgp, seed) cell; a picklable unit of work."""
    plan, dgp_index, seed_index = args
    dgp = plan.dgps[dgp_index]
    labels = estimator_labels(plan)
    panel_seed = derive_seed(plan.base_seed, SEED_STREAM_PANEL, dgp_index, seed_index)
    model_seed = derive_seed(plan.base_seed, SEED_STREAM_MODEL, dgp_index, seed_index)
    results = []
    for horizon in plan.horizons:
        t0 = dgp.resolved_T - int(horizon)
        panel = gen_panel(replace(dgp, seed=panel_seed), t0)
        truth = _select_truth(panel, plan.ground_truth, horizon)
        cell = CellResult(
            dgp_index=dgp_index,
            dgp_kind=dgp.kind,
            outcome=dgp.outcome,
            seed_index=seed_index,
            horizon=horizon,
            t0=t0,
            truth=truth,
            outcomes=panel.outcomes,
            treated_index=panel.treated_index,
            control_ids=tuple(panel.unit_labels[i] for i in panel.control_indices),
        )
        cache = _NuisanceCache()
        steps = tuple(range(1, int(horizon) + 1))
        for label, est_cfg in zip(labels, plan.estimators):
            cfg = replace(
                est_cfg,
                horizons=steps,
                regressor=replace(est_cfg.regressor, seed=model_seed),
            )
            out = EstimatorCell()
            try:
                result = estimate(panel, cfg, cache)
                out.psi = result.psi
                out.rmse = rmse(result.psi, truth)
                out.bounds_lower = np.array([e.bounds[0] for e in result.estimates])
                out.bounds_upper = np.array([e.bounds[1] for e in result.estimates])
                out.pretreatment_fit = result.pretreatment_fit
                out.initial_weights = result.initial_weights
                final = result.estimates[-1]
                out.final_weights = final.weights
                if cfg.kind == TSC:
                    out.targeting = [
                        {
                            "horizon": e.horizon,
                            "epsilon_hat": e.targeting.epsilon_hat,
                            "score_at_solution": e.targeting.score_at_solution,
                            "root_found": e.targeting.root_found,
                            "clamped": e.targeting.clamped,
                            "iterations": e.targeting.iterations,
                        }
                        for e in result.estimates
                    ]
            except Exception as exc:  # recorded, not dropped
                out.error = f"{type(exc).__name__}: {exc}"
            cell.estimators[label] = out
        results.append(cell)
    return results


def run_bench(plan: BenchPlan, workers: int = 1) -> BenchReport:
    """Execute the plan; deterministic and independent of worker count."""
    plan = plan.validate()
    jobs = [
        (plan, dgp_index, seed_index)
        for dgp_index in range(len(plan.dgps))
        for seed_index in range(plan.n_seeds)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_job = list(pool.map(_run_job, jobs))
    else:
        per_job = [_run_job(job) for job in jobs]
    cells = [cell for job_cells in per_job for cell in job_cells]
    return BenchReport(plan=plan, cells=cells)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def export_report(report: BenchReport, out_dir, svg: bool = False) -> list[Path]:
    """Write rmse_table.csv, violations.csv, per-run weight files, and a manifest.

    With ``svg=True`` also emits weight bar charts and trajectory charts for
    every cell. Returns the written paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    rmse_rows = report.rmse_table()
    path = out / "rmse_table.csv"
    _write_csv(
        path,
        ["dgp", "outcome", "horizon", "estimator", "mean_rmse", "stderr_rmse", "n_seeds", "n_missing"],
        [
            [r["dgp"], r["outcome"], r["horizon"], r["estimator"], r["mean_rmse"],
             r["stderr_rmse"], r["n_seeds"], r["n_missing"]]
            for r in rmse_rows
        ],
    )
    written.append(path)

    violation_rows = report.violation_table()
    path = out / "violations.csv"
    _write_csv(
        path,
        ["dgp", "outcome", "estimator", "bound", "violation_pct", "n_values"],
        [
            [r["dgp"], r["outcome"], r["estimator"], r["bound"], r["violation_pct"], r["n_values"]]
            for r in violation_rows
        ],
    )
    written.append(path)

    seen_names: set[str] = set()
    for cell in report.cells:
        for label, est in cell.estimators.items():
            if est.targeting is None or est.initial_weights is None:
                continue
            name = f"weights_{cell.run_id}"
            if name in seen_names:
                name = f"{name}_{label}_d{cell.dgp_index}"
            seen_names.add(name)
            weight_path = out / f"{name}.csv"
            _write_csv(
                weight_path,
                ["control_id", "initial_weight", "targeted_weight"],
                [
                    [cid, float(w0), float(w1)]
                    for cid, w0, w1 in zip(
                        cell.control_ids, est.initial_weights, est.final_weights
                    )
                ],
            )
            written.append(weight_path)
            if svg:
                svg_path = out / f"{name}.svg"
                grouped_bar_chart(
                    svg_path,
                    cell.control_ids,
                    ("initial", "#9ecae1", [float(w) for w in est.initial_weights]),
                    ("targeted", "#08519c", [float(w) for w in est.final_weights]),
                    title=f"weights {cell.run_id}",
                )
                written.append(svg_path)
    if svg:
        for cell in report.cells:
            name = f"trajectory_{cell.run_id}"
            if name in seen_names:
                name = f"{name}_d{cell.dgp_index}"
            seen_names.add(name)
            written.append(_trajectory_svg(cell, out / f"{name}.svg"))

    manifest = out / "manifest.json"
    manifest.write_text(plan_manifest(report.plan), encoding="utf-8")
    written.append(manifest)
    return written


def _trajectory_svg(cell: CellResult, path: Path) -> Path:
    times = list(range(1, cell.outcomes.shape[1] + 1))
    series = []
    for i in range(cell.outcomes.shape[0]):
        if i == cell.treated_index:
            continue
        series.append(("", "#bbbbbb", "", times, list(cell.outcomes[i])))
    series.append(("treated", "#d73027", "", times, list(cell.outcomes[cell.treated_index])))
    post = [cell.t0 + h for h in range(1, cell.horizon + 1)]
    for label, est in cell.estimators.items():
        if est.psi is None:
            continue
        color = _ESTIMATOR_COLORS.get(label, "#555555")
        series.append((label, color, "4,3", post, [float(v) for v in est.psi]))
    trajectory_chart(path, series, vline_x=cell.t0 + 0.5, title=cell.run_id)
    return path


def plan_manifest(plan: BenchPlan) -> str:
    """JSON manifest of the plan and environment versions (no timestamps)."""
    from . import __version__

    payload = {
        "package_version": __version__,
        "numpy_version": np.__version__,
        "python_version": ".".join(str(v) for v in sys.version_info[:3]),
        "plan": {
            "n_seeds": plan.n_seeds,
            "base_seed": plan.base_seed,
            "horizons": list(plan.horizons),
            "ground_truth": plan.ground_truth,
            "dgps": [
                {
                    "kind": d.kind,
                    "outcome": d.outcome,
                    "n_units": d.n_units,
                    "horizon_T": d.resolved_T,
                    "p": d.p,
                    "noise_sd": d.resolved_noise_sd,
                }
                for d in plan.dgps
            ],
            "estimators": [
                {"kind": e.kind, "cross_fit_folds": e.cross_fit_folds}
                for e in plan.estimators
            ],
        },
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
