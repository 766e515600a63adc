import json
from pathlib import Path

import numpy as np
import pytest

from tscontrol.cli import main
from tscontrol.dgp import DgpConfig, gen_panel
from tscontrol.panel_io import write_panel_csv


def read_csv_rows(path):
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def tree_bytes(root):
    return {p.name: p.read_bytes() for p in sorted(Path(root).iterdir()) if p.is_file()}


@pytest.fixture
def sim_dir(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--dgp", "linear", "--seed", "1", "--out", str(out)]) == 0
    return out


class TestSimulate:
    def test_writes_expected_files(self, sim_dir):
        assert (sim_dir / "panel.csv").exists()
        assert (sim_dir / "truth.csv").exists()
        assert (sim_dir / "meta.json").exists()
        meta = json.loads((sim_dir / "meta.json").read_text())
        assert meta["dgp"]["kind"] == "linear"
        assert meta["t0"] == 40

    def test_unknown_dgp_kind_exits_2(self, tmp_path, capsys):
        # argparse rejects the choice with the configuration exit code
        with pytest.raises(SystemExit) as excinfo:
            main(["simulate", "--dgp", "ar1", "--out", str(tmp_path)])
        assert excinfo.value.code == 2
        assert "ar1" in capsys.readouterr().err

    def test_unknown_config_key_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"dgp": {"kind": "linear", "n_knots": 3}}))
        code = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert code == 2
        assert "n_knots" in capsys.readouterr().err

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        main(["simulate", "--dgp", "hinge", "--seed", "3", "--out", str(a)])
        main(["simulate", "--dgp", "hinge", "--seed", "3", "--out", str(b)])
        assert tree_bytes(a) == tree_bytes(b)


class TestFit:
    def test_all_estimators_produce_files(self, sim_dir, tmp_path):
        out = tmp_path / "fit"
        code = main(
            ["fit", "--panel", str(sim_dir / "panel.csv"), "--t0", "40",
             "--estimator", "all", "--horizons", "1,5,10", "--out", str(out)]
        )
        assert code == 0
        for name in ("classical_sc", "plugin", "augmented_sc", "tsc"):
            assert (out / f"{name}_result.csv").exists()
        diag = read_csv_rows(out / "tsc_diagnostics.csv")
        assert {row["root_found"] for row in diag} <= {"True", "False"}
        assert (out / "summary.txt").exists()

    def test_missing_panel_exits_5(self, tmp_path, capsys):
        code = main(["fit", "--panel", str(tmp_path / "nope.csv"), "--t0", "4",
                     "--out", str(tmp_path / "o")])
        assert code == 5
        assert "nope.csv" in capsys.readouterr().err

    def test_non_finite_panel_exits_4(self, tmp_path, capsys):
        path = tmp_path / "nan.csv"
        path.write_text("id,y_1,y_2\na,1.0,nan\nb,2.0,3.0\n", encoding="utf-8")
        code = main(["fit", "--panel", str(path), "--t0", "1", "--out", str(tmp_path / "o")])
        assert code == 4
        assert "numerical error" in capsys.readouterr().err

    def test_ragged_panel_exits_3(self, tmp_path, capsys):
        path = tmp_path / "ragged.csv"
        path.write_text("id,y_1,y_2\na,1.0,\nb,2.0,3.0\n", encoding="utf-8")
        code = main(["fit", "--panel", str(path), "--t0", "1", "--out", str(tmp_path / "o")])
        assert code == 3
        assert "data error" in capsys.readouterr().err

    def test_turnout_shaped_panel_by_label(self, tmp_path):
        years = [str(y) for y in range(1960, 2000, 4)]
        header = "id," + ",".join(f"y_{y}" for y in years)
        rows = [
            ",".join(["NH"] + [f"{50 + 0.5 * i + 3 * (i >= 9)}" for i in range(10)]),
            ",".join(["VT"] + [f"{48 + 0.4 * i}" for i in range(10)]),
            ",".join(["ME"] + [f"{52 + 0.6 * i}" for i in range(10)]),
            ",".join(["RI"] + [f"{49 + 0.5 * i}" for i in range(10)]),
            ",".join(["CT"] + [f"{51 + 0.45 * i}" for i in range(10)]),
        ]
        panel_path = tmp_path / "turnout.csv"
        panel_path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"estimator": {"regressor": {"kind": "linear"}}}))
        out = tmp_path / "fit"
        code = main(
            ["fit", "--panel", str(panel_path), "--treated", "NH", "--t0", "1996",
             "--estimator", "tsc", "--config", str(cfg), "--out", str(out), "--svg"]
        )
        assert code == 0
        rows = read_csv_rows(out / "tsc_result.csv")
        assert rows[0]["time"] == "1996"
        assert (out / "trajectory.svg").exists()

    def test_flag_overrides_config_seed(self, sim_dir, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"estimator": {"regressor": {"kind": "mlp", "steps": 20, "seed": 1}}}))
        outs = []
        for seed, name in (("7", "a"), ("7", "b")):
            out = tmp_path / name
            main(["fit", "--panel", str(sim_dir / "panel.csv"), "--t0", "40",
                  "--estimator", "plugin", "--config", str(cfg), "--seed", seed,
                  "--horizons", "1", "--out", str(out)])
            outs.append(read_csv_rows(out / "plugin_result.csv")[0]["psi_hat"])
        assert outs[0] == outs[1]


class TestWeights:
    def test_columns_sum_to_one(self, sim_dir, tmp_path):
        out = tmp_path / "w"
        code = main(["weights", "--panel", str(sim_dir / "panel.csv"), "--t0", "40",
                     "--out", str(out), "--svg"])
        assert code == 0
        rows = read_csv_rows(out / "weights.csv")
        for column in ("initial_weight", "targeted_weight"):
            assert sum(float(r[column]) for r in rows) == pytest.approx(1.0, abs=1e-10)
        assert (out / "weights.svg").exists()

    def test_zero_residual_fixture_identical_columns(self, tmp_path, rng):
        # exactly-linear outcomes and a linear regressor: residuals vanish,
        # so targeting is a no-op and both weight columns agree
        from conftest import make_linear_panel

        panel = make_linear_panel(rng, n_controls=6)
        path = tmp_path / "panel.csv"
        write_panel_csv(panel, path)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"estimator": {"regressor": {"kind": "linear"}}}))
        out = tmp_path / "w"
        code = main(["weights", "--panel", str(path), "--t0", str(panel.t0),
                     "--config", str(cfg), "--out", str(out)])
        assert code == 0
        rows = read_csv_rows(out / "weights.csv")
        for row in rows:
            assert row["initial_weight"] == row["targeted_weight"]
        diag = read_csv_rows(out / "diagnostics.csv")[0]
        assert diag["clamped"] == "False"

    def test_clamped_fixture_marks_diagnostics(self, tmp_path):
        # a barely-trained unstandardized network predicts near zero, so every
        # residual keeps the (positive) sign of the outcomes and no root exists
        panel = gen_panel(DgpConfig(kind="linear", seed=2), t0=45)
        path = tmp_path / "panel.csv"
        write_panel_csv(panel, path)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "estimator": {"regressor": {
                "kind": "mlp", "hidden_units": 4, "steps": 1,
                "learning_rate": 1e-9, "seed": 3, "standardize_inputs": False,
            }}
        }))
        out = tmp_path / "w"
        code = main(["weights", "--panel", str(path), "--t0", "45",
                     "--config", str(cfg), "--out", str(out)])
        assert code == 0
        diag = read_csv_rows(out / "diagnostics.csv")[0]
        assert diag["clamped"] == "True"
        assert diag["root_found"] == "False"
        rows = read_csv_rows(out / "weights.csv")
        assert any(r["initial_weight"] != r["targeted_weight"] for r in rows)


class TestBenchmark:
    @pytest.fixture
    def plan_config(self, tmp_path):
        cfg = tmp_path / "plan.json"
        cfg.write_text(json.dumps({
            "bench": {
                "n_seeds": 2,
                "horizons": [1, 2],
                "dgps": [
                    {"kind": "linear"},
                    {"kind": "linear", "outcome": "binary"},
                ],
                "estimators": [
                    {"kind": "classical_sc"},
                    {"kind": "tsc", "regressor": {"kind": "mlp", "hidden_units": 10, "steps": 50}},
                ],
            }
        }))
        return cfg

    def test_runs_and_writes_tables(self, plan_config, tmp_path):
        out = tmp_path / "bench"
        code = main(["benchmark", "--config", str(plan_config), "--out", str(out)])
        assert code == 0
        assert (out / "rmse_table.csv").exists()
        assert (out / "violations.csv").exists()
        assert (out / "manifest.json").exists()

    def test_byte_identical_reruns_and_worker_independence(self, plan_config, tmp_path):
        outs = []
        for name, workers in (("r1", "1"), ("r2", "1"), ("w2", "2")):
            out = tmp_path / name
            code = main(["benchmark", "--config", str(plan_config), "--out", str(out),
                         "--workers", workers])
            assert code == 0
            outs.append(tree_bytes(out))
        assert outs[0] == outs[1]
        assert outs[0] == outs[2]

    def test_seeds_flag_overrides_config(self, plan_config, tmp_path):
        out = tmp_path / "bench"
        main(["benchmark", "--config", str(plan_config), "--seeds", "1", "--out", str(out)])
        rows = read_csv_rows(out / "rmse_table.csv")
        assert all(row["n_seeds"] == "1" for row in rows)

    def test_unknown_bench_key_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"bench": {"n_sides": 7}}))
        code = main(["benchmark", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert code == 2
        assert "n_sides" in capsys.readouterr().err
