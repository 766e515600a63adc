"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s``. The two benchmark
fixtures execute the full default evaluation protocol (4 generators x
horizons 1/5/10 x 5 seeds x 4 estimators) once per outcome kind and are
shared across criteria.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from oracles import (
    bisect_epsilon_oracle,
    finite_difference_grads,
    matching_oracle,
    projection_oracle,
)
from tscontrol.bench import BenchPlan, default_dgp_grid, run_bench
from tscontrol.cli import main as cli_main
from tscontrol.dgp import DgpConfig, binarize, factor_basis, gen_panel, linear_mean
from tscontrol.estimators import decomposition_check
from tscontrol.panel import PanelDataset, build_features
from tscontrol.regression import (
    LinearOutcomeModel,
    RegressorSpec,
    _mlp_loss_and_grads,
    fit_outcome_model,
)
from tscontrol.targeting import TiltScores, default_eps_max, targeted_weights, tilt_weights
from tscontrol.weights import project_simplex, solve_sc_weights

_RUNTIME_BUDGET_SECONDS = 600.0


def _report(number: int, name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    print(f"[criterion {number:2d}] {name}: {status} {detail}".rstrip())
    assert passed, f"criterion {number} ({name}) failed: {detail}"


@pytest.fixture(scope="session")
def binary_report():
    plan = BenchPlan(dgps=default_dgp_grid(("binary",)))
    start = time.perf_counter()
    report = run_bench(plan)
    report.elapsed_seconds = time.perf_counter() - start
    return report


@pytest.fixture(scope="session")
def continuous_report():
    plan = BenchPlan(dgps=default_dgp_grid(("continuous",)))
    report = run_bench(plan)
    return report


def test_criterion_1_boundedness(binary_report):
    rows = binary_report.violation_table()
    convex = [r for r in rows if r["estimator"] in ("classical_sc", "tsc")]
    exact_zero = all(r["violation_pct"] == 0.0 for r in convex)
    augmented = {
        r["dgp"]: 0.0 for r in rows if r["estimator"] == "augmented_sc" and r["bound"] == "upper"
    }
    for r in rows:
        if r["estimator"] == "augmented_sc":
            augmented[r["dgp"]] += r["violation_pct"]
    violating = [k for k in ("linear", "hinge", "quadratic") if augmented[k] > 0.0]
    within_budget = binary_report.elapsed_seconds < _RUNTIME_BUDGET_SECONDS
    detail = (
        f"(tsc/classical zero: {exact_zero}; augmented violates on {violating}; "
        f"runtime {binary_report.elapsed_seconds:.1f}s)"
    )
    _report(1, "boundedness on binary benchmark", exact_zero and bool(violating) and within_budget, detail)


def test_criterion_2_residual_balance(binary_report, continuous_report, rng):
    worst = 0.0
    checked = 0
    for report in (binary_report, continuous_report):
        for cell in report.cells:
            targeting = cell.estimators["tsc"].targeting
            if targeting is None:
                continue
            for entry in targeting:
                if entry["root_found"]:
                    worst = max(worst, abs(entry["score_at_solution"]))
                    checked += 1
    for _ in range(200):
        w0 = rng.dirichlet(np.ones(4))
        residuals = rng.normal(size=4)
        result = targeted_weights(w0, residuals)
        if result.root_found:
            worst = max(worst, abs(float(result.targeted_weights @ residuals)))
            checked += 1
    _report(2, "residual balance at converged tilts", worst <= 1e-8,
            f"(max |weighted residual| = {worst:.2e} over {checked} fits)")


def test_criterion_3_targeting_oracle(rng):
    worst = 0.0
    for _ in range(100):
        w0 = rng.dirichlet(np.ones(4))
        residuals = rng.normal(size=4)
        residuals -= residuals.mean()  # ensures a root exists
        result = targeted_weights(w0, residuals)
        eps_max = default_eps_max(TiltScores(residuals, "residual"))
        oracle = bisect_epsilon_oracle(w0, residuals, -eps_max, eps_max, tol=1e-10)
        worst = max(worst, abs(result.epsilon_hat - oracle))
    closed = targeted_weights(np.array([0.5, 0.5]), np.array([2.0, -1.0]))
    eps_err = abs(closed.epsilon_hat - (-np.log(2.0) / 3.0))
    w_err = float(np.max(np.abs(closed.targeted_weights - np.array([1 / 3, 2 / 3]))))
    ok = worst <= 1e-6 and eps_err <= 1e-8 and w_err <= 1e-8
    _report(3, "tilt solver matches bisection oracle", ok,
            f"(max |eps diff| = {worst:.2e}; closed form eps err {eps_err:.2e}, w err {w_err:.2e})")


def test_criterion_4_simplex_oracles(rng):
    worst_proj = 0.0
    for _ in range(150):
        dim = int(rng.integers(1, 4))
        v = rng.normal(scale=2.5, size=dim)
        w = project_simplex(v)
        _, best = projection_oracle(v)
        worst_proj = max(worst_proj, float((w - v) @ (w - v)) - best)
    worst_match = 0.0
    for _ in range(60):
        k = int(rng.integers(1, 4))
        controls = rng.normal(size=(k, 4))
        x1 = rng.normal(size=4)
        sol = solve_sc_weights(x1, controls)
        _, best = matching_oracle(x1, controls)
        worst_match = max(worst_match, sol.objective - best)
    worst_hull = 0.0
    for _ in range(40):
        controls = rng.normal(size=(4, 6))
        x1 = rng.dirichlet(np.ones(4)) @ controls
        worst_hull = max(worst_hull, solve_sc_weights(x1, controls).objective)
    ok = worst_proj <= 1e-6 and worst_match <= 1e-6 and worst_hull <= 1e-6
    _report(4, "simplex solvers match brute-force oracles", ok,
            f"(proj gap {worst_proj:.2e}, match gap {worst_match:.2e}, hull residual {worst_hull:.2e})")


def test_criterion_5_decomposition_identity(rng):
    worst = 0.0
    for seed in range(5):
        panel = gen_panel(DgpConfig(kind="hinge", seed=seed), t0=46)
        feats = build_features(panel)
        controls = panel.control_indices
        for horizon in (1, 3):
            y = panel.outcomes[controls, panel.time_index(horizon)]
            model = fit_outcome_model(
                feats[controls], y, RegressorSpec(kind="linear"), horizon
            )
            for _ in range(10):
                w = rng.dirichlet(np.ones(len(controls)) * rng.uniform(0.3, 3.0))
                _, _, total = decomposition_check(panel, w, model, horizon)
                worst = max(worst, abs(total - float(w @ y)))
    _report(5, "weighted-outcome decomposition identity", worst <= 1e-12,
            f"(max |identity gap| = {worst:.2e})")


def test_criterion_6_regressor_gradients(rng):
    X = rng.normal(size=(3, 4))
    y = rng.normal(size=3)
    bound = 1.0 / np.sqrt(4)
    params = [
        rng.uniform(-bound, bound, size=(4, 6)),
        rng.uniform(-bound, bound, size=6),
        rng.uniform(-0.4, 0.4, size=6),
        float(rng.uniform(-0.4, 0.4)),
    ]
    _, analytic = _mlp_loss_and_grads(tuple(params), X, y)
    numeric = finite_difference_grads(
        lambda p: _mlp_loss_and_grads((p[0], p[1], p[2], p[3]), X, y)[0], params
    )
    rel = 0.0
    for a, n in zip(analytic, numeric):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        n = np.atleast_1d(np.asarray(n, dtype=float))
        rel = max(rel, float(np.max(np.abs(a - n) / np.maximum(np.abs(n), 1e-8))))
    Xl = rng.normal(size=(12, 4))
    yl = rng.normal(size=12)
    model = LinearOutcomeModel().fit(Xl, yl)
    design = np.column_stack([np.ones(12), Xl])
    orth = float(np.max(np.abs(design.T @ (yl - model.predict(Xl)))))
    ok = rel <= 1e-4 and orth <= 1e-8
    _report(6, "regressor gradients and normal equations", ok,
            f"(max rel grad err {rel:.2e}, max orthogonality defect {orth:.2e})")


def test_criterion_7_tilt_invariants(rng):
    worst_sum = worst_zero = worst_shift = 0.0
    nonneg = True
    for _ in range(1000):
        n = int(rng.integers(2, 8))
        w0 = rng.dirichlet(np.ones(n) * rng.uniform(0.2, 4.0))
        s = rng.normal(scale=rng.uniform(0.2, 4.0), size=n)
        scores = TiltScores(s, "residual")
        eps = float(rng.uniform(-1.0, 1.0)) * default_eps_max(scores)
        w = tilt_weights(w0, scores, eps)
        nonneg &= bool(np.all(w >= 0))
        worst_sum = max(worst_sum, abs(float(w.sum()) - 1.0))
        worst_zero = max(worst_zero, float(np.max(np.abs(tilt_weights(w0, scores, 0.0) - w0))))
        shifted = tilt_weights(w0, TiltScores(s + float(rng.normal()), "residual"), eps)
        worst_shift = max(worst_shift, float(np.max(np.abs(w - shifted))))
    monotone = True
    for _ in range(25):
        w0 = rng.dirichlet(np.ones(5))
        residuals = rng.normal(size=5)
        scores = TiltScores(residuals, "residual")
        grid = np.linspace(-default_eps_max(scores), default_eps_max(scores), 100)
        values = [float(tilt_weights(w0, scores, e) @ residuals) for e in grid]
        monotone &= bool(np.all(np.diff(values) >= -1e-9))
    ok = nonneg and worst_sum <= 1e-12 and worst_zero <= 1e-12 and worst_shift <= 1e-12 and monotone
    _report(7, "tilt submodel invariants", ok,
            f"(sum gap {worst_sum:.1e}, passthrough {worst_zero:.1e}, "
            f"shift {worst_shift:.1e}, monotone {monotone})")


def test_criterion_8_protocol_performance(continuous_report):
    rows = continuous_report.rmse_table()
    table = {(r["dgp"], r["horizon"], r["estimator"]): r["mean_rmse"] for r in rows}
    wins = 0
    cells = []
    for dgp in ("linear", "hinge", "quadratic", "timevarying"):
        for horizon in (1, 5, 10):
            tsc = table[(dgp, horizon, "tsc")]
            classical = table[(dgp, horizon, "classical_sc")]
            ok = tsc is not None and classical is not None and tsc <= classical
            wins += int(ok)
            fmt = lambda v: "missing" if v is None else f"{v:.4f}"
            cells.append(f"{dgp}/h{horizon}: tsc={fmt(tsc)} sc={fmt(classical)} {'<=' if ok else '>'}")
    print("\n".join("    " + c for c in cells))
    _report(8, "targeted update at least matches matching-only baseline", wins >= 8,
            f"({wins}/12 cells with tsc <= classical)")


def test_criterion_9_dgp_fixtures():
    x = np.full(12, 10.0 / 12.0)
    linear_err = abs(linear_mean(x, 10) - 2.6)
    # hinge trend kink contributes exactly zero at the knot
    kink = max(0.0, 10.0 - 10.0) * 0.04
    f1, f2, f3 = factor_basis(np.array([0.5]))[:, 0]
    outcomes = np.array([[0.0, 5.0], [10.0, 2.0]])
    halfway = binarize(PanelDataset(outcomes=outcomes, t0=1), seed=1)
    pi_mid = float(halfway.ground_truth.noiseless[0])
    reproducible = True
    for kind in ("linear", "hinge", "quadratic", "timevarying"):
        for outcome in ("continuous", "binary"):
            cfg = DgpConfig(kind=kind, outcome=outcome, seed=99)
            a = gen_panel(cfg, t0=cfg.resolved_T - 5)
            b = gen_panel(cfg, t0=cfg.resolved_T - 5)
            reproducible &= bool(np.array_equal(a.outcomes, b.outcomes))
    ok = (
        linear_err <= 1e-12
        and kink == 0.0
        and f1 == 0.0
        and abs(f3) <= 1e-15
        and pi_mid == 0.5
        and reproducible
    )
    _report(9, "generator closed-form fixtures and reproducibility", ok,
            f"(linear err {linear_err:.1e}, basis zeros ({f1}, {f3:.1e}), pi mid {pi_mid}, "
            f"reproducible {reproducible})")


def test_criterion_10_end_to_end_determinism(tmp_path):
    config = tmp_path / "plan.json"
    config.write_text(json.dumps({
        "bench": {
            "n_seeds": 2,
            "horizons": [1, 3],
            "dgps": [
                {"kind": "linear"},
                {"kind": "quadratic", "outcome": "binary"},
            ],
            "estimators": [
                {"kind": "classical_sc"},
                {"kind": "augmented_sc",
                 "regressor": {"kind": "mlp", "hidden_units": 25, "steps": 150}},
                {"kind": "tsc",
                 "regressor": {"kind": "mlp", "hidden_units": 25, "steps": 150}},
            ],
        }
    }))

    def run(name, workers):
        out = tmp_path / name
        code = cli_main(["benchmark", "--config", str(config), "--out", str(out),
                         "--workers", str(workers)])
        assert code == 0
        return {p.name: p.read_bytes() for p in sorted(Path(out).iterdir())}

    first = run("a", 1)
    second = run("b", 1)
    parallel = run("c", 4)
    identical = first == second
    worker_free = first == parallel
    _report(10, "byte-identical reports across reruns and workers",
            identical and worker_free,
            f"(rerun identical: {identical}; workers-independent: {worker_free}; "
            f"{len(first)} files compared)")
