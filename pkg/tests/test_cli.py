import json
from pathlib import Path

import pytest

from trajconstrain.cli import (
    CSV_SCHEMA,
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_ORACLE,
    main,
)


def base_config(**overrides):
    cfg = {
        "seed": 7,
        "window": {"alpha": 0, "gamma": 12},
        "motion": {
            "transition": [[1.0, 1.0], [0.0, 1.0]],
            "process_noise": [[0.1, 0.05], [0.05, 0.1]],
            "survival": 0.95,
            "birth_rate": 0.3,
            "birth_mean": [0.0, 1.0],
            "birth_cov": [[4.0, 0.0], [0.0, 1.0]],
        },
        "sensor": {
            "measurement": [[1.0, 0.0]],
            "noise": [[0.25]],
            "detection": 0.9,
            "clutter_rate": 1.0,
            "clutter_low": [-60.0],
            "clutter_high": [60.0],
        },
        "track": {
            "measurements": [
                {"time": 2, "value": [2.0]},
                {"time": 3, "value": [3.1]},
                {"time": 5, "value": [5.2]},
            ],
            "r0": 0.9,
            "slack": 2,
        },
        "constraints": {
            "mode": "conjunct",
            "items": [
                {
                    "time": 3,
                    "boxes": [{"lower": [0.0, None], "upper": [6.0, None]}],
                }
            ],
        },
        "mc_budget": 30000,
        "oracle": {"n": 50000},
    }
    cfg.update(overrides)
    return cfg


def run(tmp_path, cfg, command, extra=(), name="cfg.json", subdir="out"):
    cfg_path = tmp_path / name
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / subdir
    return main([command, "--config", str(cfg_path), "--out-dir", str(out), *extra]), out


class TestSimulate:
    def test_outputs_and_schema(self, tmp_path):
        code, out = run(tmp_path, base_config(), "simulate")
        assert code == EXIT_OK
        csv = (out / "trajectories.csv").read_text().splitlines()
        assert csv[0] == f"# schema={CSV_SCHEMA}"
        assert csv[1] == "trajectory,time,x0,x1"
        scenario = json.loads((out / "scenario.json").read_text())
        assert scenario["schema"] == "trajconstrain-scenario-v1"

    def test_deterministic(self, tmp_path):
        _, out1 = run(tmp_path, base_config(), "simulate", subdir="a")
        _, out2 = run(tmp_path, base_config(), "simulate", subdir="b")
        assert (out1 / "scenario.json").read_bytes() == (out2 / "scenario.json").read_bytes()
        assert (out1 / "trajectories.csv").read_bytes() == (out2 / "trajectories.csv").read_bytes()

    def test_seed_override_changes_output(self, tmp_path):
        _, out1 = run(tmp_path, base_config(), "simulate", subdir="a")
        _, out2 = run(tmp_path, base_config(), "simulate", ("--seed", "8"), subdir="b")
        assert (out1 / "scenario.json").read_text() != (out2 / "scenario.json").read_text()

    def test_empty_truth_still_writes_files(self, tmp_path):
        cfg = base_config()
        cfg["motion"]["birth_rate"] = 0.0
        code, out = run(tmp_path, cfg, "simulate")
        assert code == EXIT_OK
        csv = (out / "trajectories.csv").read_text().splitlines()
        assert len(csv) == 2  # schema + header only
        assert json.loads((out / "scenario.json").read_text())["truth"] == []


class TestConstrain:
    def test_outputs(self, tmp_path):
        code, out = run(tmp_path, base_config(), "constrain")
        assert code == EXIT_OK
        summary = json.loads((out / "summary.json").read_text())
        assert summary["r"] == 0.9
        assert 0.0 < summary["r_constrained"] <= 0.9
        assert summary["degenerate"] is False
        assert summary["report"]["joint"] == pytest.approx(
            summary["report"]["prob_alive"] * summary["report"]["prob_spatial"]
        )
        csv = (out / "constrained.csv").read_text().splitlines()
        assert csv[0] == f"# schema={CSV_SCHEMA}"
        assert "constrained_mean_x0" in csv[1]

    def test_deterministic(self, tmp_path):
        _, out1 = run(tmp_path, base_config(), "constrain", subdir="a")
        _, out2 = run(tmp_path, base_config(), "constrain", subdir="b")
        assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()
        assert (out1 / "constrained.csv").read_bytes() == (out2 / "constrained.csv").read_bytes()

    def test_zero_support_is_numeric_error(self, tmp_path):
        cfg = base_config()
        # constraint time outside every plausible (birth, death) hypothesis
        cfg["constraints"]["items"] = [{"time": 12}]
        code, _ = run(tmp_path, cfg, "constrain")
        assert code == EXIT_NUMERIC


class TestConfigErrors:
    def test_missing_file(self, tmp_path):
        code = main(["simulate", "--config", str(tmp_path / "nope.json")])
        assert code == EXIT_CONFIG

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert main(["simulate", "--config", str(p)]) == EXIT_CONFIG

    def test_missing_field(self, tmp_path):
        cfg = base_config()
        del cfg["window"]
        code, _ = run(tmp_path, cfg, "simulate")
        assert code == EXIT_CONFIG

    def test_bad_constraint_mode(self, tmp_path):
        cfg = base_config()
        cfg["constraints"]["mode"] = "neither"
        code, _ = run(tmp_path, cfg, "constrain")
        assert code == EXIT_CONFIG

    def test_measurement_outside_window(self, tmp_path):
        cfg = base_config()
        cfg["track"]["measurements"].append({"time": 99, "value": [0.0]})
        code, _ = run(tmp_path, cfg, "constrain")
        assert code == EXIT_CONFIG


class TestOracleCommand:
    def test_pass(self, tmp_path):
        code, out = run(tmp_path, base_config(), "oracle")
        assert code == EXIT_OK
        report = json.loads((out / "oracle_report.json").read_text())
        assert report["passed"] is True
        assert report["bernoulli"]["passed"] is True
        txt = (out / "oracle_report.txt").read_text()
        assert "[bernoulli]" in txt and "pass" in txt

    def test_with_ppp_check(self, tmp_path):
        cfg = base_config()
        cfg["oracle"]["mu"] = 2.0
        cfg["oracle"]["n_runs"] = 4000
        code, out = run(tmp_path, cfg, "oracle")
        assert code == EXIT_OK
        report = json.loads((out / "oracle_report.json").read_text())
        assert report["ppp"]["passed"] is True

    def test_corrupted_analytic_fails(self, tmp_path, capsys):
        cfg = base_config()
        cfg["oracle"]["corrupt_analytic_scale"] = 1.5
        code, out = run(tmp_path, cfg, "oracle")
        assert code == EXIT_ORACLE
        report = json.loads((out / "oracle_report.json").read_text())
        assert report["passed"] is False
        assert "FAIL" in capsys.readouterr().out
