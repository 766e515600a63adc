"""Command-line interface: simulate panels, fit estimators, run benchmarks.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
error, 5 I/O error. Flags override config-file values which override
defaults. All randomness flows from the seeds in the config or flags.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .bench import export_report, run_bench
from .config import (
    bench_plan_from_dict,
    dgp_config_from_dict,
    estimator_config_from_dict,
    load_config,
)
from .dgp import DGP_KINDS, gen_panel
from .errors import ConfigError, DataError, NumericError, TscError
from .estimators import ESTIMATOR_KINDS, EstimatorConfig, estimate
from .panel import PanelDataset
from .panel_io import load_panel_csv, write_panel_csv
from .svg import trajectory_chart

_SIX = "{:.6g}".format


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 5
    except TscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tscontrol",
        description="Targeted synthetic control estimators, data generators, and benchmarks.",
    )
    parser.add_argument("--version", action="version", version=f"tscontrol {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic panel and write it to CSV")
    sim.add_argument("--config", help="JSON config with a 'dgp' section")
    sim.add_argument("--dgp", choices=DGP_KINDS, help="generator kind")
    sim.add_argument("--outcome", choices=("continuous", "binary"))
    sim.add_argument("--seed", type=int)
    sim.add_argument("--t0", type=int, help="pre-treatment period count (default T-10)")
    sim.add_argument("--out", required=True, help="output directory")
    sim.set_defaults(handler=_cmd_simulate)

    fit = sub.add_parser("fit", help="fit estimators on a panel CSV")
    fit.add_argument("--panel", required=True, help="panel CSV path")
    fit.add_argument("--schema", choices=("wide", "long"), default="wide")
    fit.add_argument("--config", help="JSON config with an 'estimator' section")
    fit.add_argument("--estimator", default="all", help="one of %s or 'all'" % (ESTIMATOR_KINDS,))
    fit.add_argument("--treated", default="0", help="treated unit id or row index")
    fit.add_argument("--t0", help="pre-period count or first treated time label")
    fit.add_argument("--outcome", choices=("continuous", "binary"), default="continuous")
    fit.add_argument("--horizons", help="comma-separated post-treatment steps (default: all)")
    fit.add_argument("--seed", type=int, help="regressor seed override")
    fit.add_argument("--out", required=True)
    fit.add_argument("--svg", action=argparse.BooleanOptionalAction, default=False)
    fit.set_defaults(handler=_cmd_fit)

    bench = sub.add_parser("benchmark", help="run the evaluation protocol")
    bench.add_argument("--config", help="JSON config with a 'bench' section")
    bench.add_argument("--seeds", type=int, help="number of replications")
    bench.add_argument("--seed", type=int, help="base seed")
    bench.add_argument("--ground-truth", choices=("realized", "noiseless"))
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--out", required=True)
    bench.add_argument("--svg", action=argparse.BooleanOptionalAction, default=False)
    bench.set_defaults(handler=_cmd_benchmark)

    weights = sub.add_parser("weights", help="export initial vs targeted weights for a panel")
    weights.add_argument("--panel", required=True)
    weights.add_argument("--schema", choices=("wide", "long"), default="wide")
    weights.add_argument("--config", help="JSON config with an 'estimator' section")
    weights.add_argument("--treated", default="0")
    weights.add_argument("--t0")
    weights.add_argument("--outcome", choices=("continuous", "binary"), default="continuous")
    weights.add_argument("--horizon", type=int, help="post-treatment step (default: last)")
    weights.add_argument("--seed", type=int)
    weights.add_argument("--out", required=True)
    weights.add_argument("--svg", action=argparse.BooleanOptionalAction, default=False)
    weights.set_defaults(handler=_cmd_weights)
    return parser


def _config_section(args, section: str) -> dict:
    if not getattr(args, "config", None):
        return {}
    data = load_config(args.config)
    _reject_unknown_sections(data)
    return data.get(section, {})


def _reject_unknown_sections(data: dict) -> None:
    allowed = {"dgp", "estimator", "bench", "t0", "treated", "outcome", "schema"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown top-level config section(s) {unknown}")


def _fmt_file(x) -> str:
    return repr(float(x))


def _write_rows(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)] + [",".join(str(c) for c in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _cmd_simulate(args) -> int:
    section = _config_section(args, "dgp")
    overrides = {"kind": args.dgp, "outcome": args.outcome, "seed": args.seed}
    for key, value in overrides.items():
        if value is not None:
            section[key] = value
    cfg = dgp_config_from_dict(section)
    t0 = args.t0 if args.t0 is not None else cfg.resolved_T - 10
    panel = gen_panel(cfg, t0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_panel_csv(panel, out / "panel.csv", schema="wide")
    truth = panel.ground_truth
    _write_rows(
        out / "truth.csv",
        ["horizon", "time", "realized_untreated", "noiseless_mean"],
        [
            [h + 1, panel.time_labels[panel.t0 + h], _fmt_file(truth.realized[h]), _fmt_file(truth.noiseless[h])]
            for h in range(panel.n_post_periods)
        ],
    )
    meta = {
        "package_version": __version__,
        "dgp": dataclasses.asdict(cfg),
        "t0": panel.t0,
        "resolved_T": cfg.resolved_T,
        "resolved_noise_sd": cfg.resolved_noise_sd,
        "treated_unit": panel.unit_labels[panel.treated_index],
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote panel.csv, truth.csv, meta.json to {out}")
    return 0


def _load_panel_args(args) -> PanelDataset:
    data = load_config(args.config) if getattr(args, "config", None) else {}
    if data:
        _reject_unknown_sections(data)
    treated = args.treated if args.treated is not None else data.get("treated", 0)
    t0 = args.t0 if args.t0 is not None else data.get("t0")
    outcome = args.outcome or data.get("outcome", "continuous")
    schema = args.schema or data.get("schema", "wide")
    return load_panel_csv(
        args.panel, schema=schema, treated=_maybe_int(treated), t0=t0, outcome_kind=outcome
    )


def _maybe_int(value):
    if isinstance(value, str) and value.isdigit():
        return int(value)
    return value


def _estimator_configs(args) -> list[tuple[str, EstimatorConfig]]:
    section = _config_section(args, "estimator")
    base = estimator_config_from_dict(section) if section else EstimatorConfig()
    if args.seed is not None:
        base = dataclasses.replace(
            base, regressor=dataclasses.replace(base.regressor, seed=args.seed)
        )
    if getattr(args, "horizons", None):
        try:
            horizons = tuple(int(h) for h in str(args.horizons).split(","))
        except ValueError:
            raise ConfigError(f"cannot parse horizons {args.horizons!r}") from None
        base = dataclasses.replace(base, horizons=horizons)
    name = args.estimator
    if name == "all":
        return [(k, dataclasses.replace(base, kind=k)) for k in ESTIMATOR_KINDS]
    if name not in ESTIMATOR_KINDS:
        raise ConfigError(f"unknown estimator {name!r}; choose from {ESTIMATOR_KINDS} or 'all'")
    return [(name, dataclasses.replace(base, kind=name))]


def _cmd_fit(args) -> int:
    panel = _load_panel_args(args)
    configs = _estimator_configs(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = [f"panel: {args.panel} (N={panel.n_units}, T={panel.n_periods}, t0={panel.t0})"]
    control_ids = [panel.unit_labels[i] for i in panel.control_indices]
    svg_series = None
    if args.svg:
        times = list(range(1, panel.n_periods + 1))
        svg_series = [("", "#bbbbbb", "", times, list(panel.outcomes[i])) for i in panel.control_indices]
        svg_series.append(("observed", "#d73027", "", times, list(panel.outcomes[panel.treated_index])))
    for label, cfg in configs:
        result = estimate(panel, cfg)
        rows = []
        for e in result.estimates:
            time_label = panel.time_labels[e.time_index] if panel.time_labels else e.time_index + 1
            rows.append(
                [e.horizon, time_label, _fmt_file(e.psi_hat), _fmt_file(e.tau_hat),
                 _fmt_file(e.observed), e.bounds_violation]
            )
        _write_rows(
            out / f"{label}_result.csv",
            ["horizon", "time", "psi_hat", "tau_hat", "observed", "bounds_violation"],
            rows,
        )
        summary.append(f"[{label}]")
        if result.pretreatment_fit is not None:
            summary.append(f"  pretreatment_fit: {_SIX(result.pretreatment_fit)}")
        for e in result.estimates:
            summary.append(
                f"  h={e.horizon}: psi_hat={_SIX(e.psi_hat)} tau_hat={_SIX(e.tau_hat)}"
            )
        if result.initial_weights is not None:
            final = result.estimates[-1]
            _write_rows(
                out / f"{label}_weights.csv",
                ["control_id", "initial_weight", "final_weight"],
                [
                    [cid, _fmt_file(w0), _fmt_file(w1)]
                    for cid, w0, w1 in zip(
                        control_ids,
                        result.initial_weights,
                        final.weights if final.weights is not None else result.initial_weights,
                    )
                ],
            )
        if cfg.kind == "tsc":
            _write_rows(
                out / f"{label}_diagnostics.csv",
                ["horizon", "epsilon_hat", "score_at_solution", "root_found", "clamped", "iterations"],
                [
                    [e.horizon, _fmt_file(e.targeting.epsilon_hat),
                     _fmt_file(e.targeting.score_at_solution), e.targeting.root_found,
                     e.targeting.clamped, e.targeting.iterations]
                    for e in result.estimates
                ],
            )
            for e in result.estimates:
                summary.append(
                    f"  h={e.horizon}: epsilon_hat={_SIX(e.targeting.epsilon_hat)} "
                    f"f={_SIX(e.targeting.score_at_solution)} root_found={e.targeting.root_found}"
                )
        if svg_series is not None:
            post = [panel.t0 + e.horizon for e in result.estimates]
            from .bench import _ESTIMATOR_COLORS

            svg_series.append(
                (label, _ESTIMATOR_COLORS.get(cfg.kind, "#555555"), "4,3", post, list(result.psi))
            )
    (out / "summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
    if svg_series is not None:
        trajectory_chart(out / "trajectory.svg", svg_series, vline_x=panel.t0 + 0.5,
                         title=Path(args.panel).stem)
    print("\n".join(summary))
    return 0


def _cmd_benchmark(args) -> int:
    section = _config_section(args, "bench")
    plan = bench_plan_from_dict(section)
    updates = {}
    if args.seeds is not None:
        updates["n_seeds"] = args.seeds
    if args.seed is not None:
        updates["base_seed"] = args.seed
    if args.ground_truth is not None:
        updates["ground_truth"] = args.ground_truth
    if updates:
        plan = dataclasses.replace(plan, **updates).validate()
    report = run_bench(plan, workers=max(1, args.workers))
    written = export_report(report, args.out, svg=args.svg)
    print(f"benchmark complete: {len(report.cells)} cells, {len(written)} files in {args.out}")
    return 0


def _cmd_weights(args) -> int:
    panel = _load_panel_args(args)
    section = _config_section(args, "estimator")
    base = estimator_config_from_dict(section) if section else EstimatorConfig()
    base = dataclasses.replace(base, kind="tsc")
    if args.seed is not None:
        base = dataclasses.replace(base, regressor=dataclasses.replace(base.regressor, seed=args.seed))
    horizon = args.horizon if args.horizon is not None else panel.n_post_periods
    base = dataclasses.replace(base, horizons=(horizon,))
    result = estimate(panel, base)
    est = result.estimates[0]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    control_ids = [panel.unit_labels[i] for i in panel.control_indices]
    _write_rows(
        out / "weights.csv",
        ["control_id", "initial_weight", "targeted_weight"],
        [
            [cid, _fmt_file(w0), _fmt_file(w1)]
            for cid, w0, w1 in zip(control_ids, result.initial_weights, est.weights)
        ],
    )
    _write_rows(
        out / "diagnostics.csv",
        ["horizon", "epsilon_hat", "score_at_solution", "root_found", "clamped", "iterations"],
        [[est.horizon, _fmt_file(est.targeting.epsilon_hat), _fmt_file(est.targeting.score_at_solution),
          est.targeting.root_found, est.targeting.clamped, est.targeting.iterations]],
    )
    if args.svg:
        from .svg import grouped_bar_chart

        grouped_bar_chart(
            out / "weights.svg",
            control_ids,
            ("initial", "#9ecae1", [float(w) for w in result.initial_weights]),
            ("targeted", "#08519c", [float(w) for w in est.weights]),
            title=f"weights h={horizon}",
        )
    print(
        f"weights written to {out}: epsilon_hat={_SIX(est.targeting.epsilon_hat)} "
        f"root_found={est.targeting.root_found} clamped={est.targeting.clamped}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
