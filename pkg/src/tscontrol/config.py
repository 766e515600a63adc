"""JSON config documents for the CLI; unknown keys are rejected."""

from __future__ import annotations

import json
from pathlib import Path

from .bench import BenchPlan, default_dgp_grid, default_estimator_grid
from .dgp import DgpConfig
from .errors import ConfigError
from .estimators import EstimatorConfig
from .regression import RegressorSpec
from .targeting import TargetingConfig
from .weights import MatchConfig


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def _check_keys(data: dict, allowed, where: str) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}")


def _build(cls, data: dict, where: str, converters: dict | None = None):
    converters = converters or {}
    fields = cls.__dataclass_fields__
    _check_keys(data, fields, where)
    kwargs = {}
    for key, value in data.items():
        if key in converters and value is not None:
            value = converters[key](value)
        kwargs[key] = value
    try:
        return cls(**kwargs).validate()
    except TypeError as exc:
        raise ConfigError(f"bad value in {where}: {exc}") from None


def match_config_from_dict(data: dict) -> MatchConfig:
    return _build(MatchConfig, data, "match", {"importance": tuple})


def regressor_spec_from_dict(data: dict) -> RegressorSpec:
    return _build(RegressorSpec, data, "regressor")


def targeting_config_from_dict(data: dict) -> TargetingConfig:
    return _build(TargetingConfig, data, "targeting")


def dgp_config_from_dict(data: dict) -> DgpConfig:
    return _build(DgpConfig, data, "dgp")


def estimator_config_from_dict(data: dict) -> EstimatorConfig:
    return _build(
        EstimatorConfig,
        data,
        "estimator",
        {
            "horizons": lambda v: tuple(int(h) for h in v),
            "match": match_config_from_dict,
            "regressor": regressor_spec_from_dict,
            "targeting": targeting_config_from_dict,
        },
    )


def bench_plan_from_dict(data: dict) -> BenchPlan:
    _check_keys(
        data,
        ("dgps", "estimators", "horizons", "n_seeds", "base_seed", "ground_truth", "outcomes"),
        "bench",
    )
    if "dgps" in data:
        dgps = tuple(dgp_config_from_dict(d) for d in data["dgps"])
    else:
        outcomes = tuple(data.get("outcomes", ("continuous", "binary")))
        dgps = default_dgp_grid(outcomes)
    if "estimators" in data:
        estimators = tuple(estimator_config_from_dict(e) for e in data["estimators"])
    else:
        estimators = default_estimator_grid()
    plan = BenchPlan(
        dgps=dgps,
        estimators=estimators,
        horizons=tuple(int(h) for h in data.get("horizons", (1, 5, 10))),
        n_seeds=int(data.get("n_seeds", 5)),
        base_seed=int(data.get("base_seed", 0)),
        ground_truth=data.get("ground_truth", "realized"),
    )
    return plan.validate()
