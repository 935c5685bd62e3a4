import json

import numpy as np
import pytest

from heavyq.cli import main
from heavyq.harness import ConvergenceReport


@pytest.fixture
def config_file(tmp_path):
    cfg = {
        "lambda": 1.0,
        "theta": 0.0,
        "arrival": {"kind": "exponential", "rate": 1.0},
        "service": {"kind": "exponential", "rate": 1.0},
        "patience": {"mode": "unscaled", "spec": {"kind": "exponential", "rate": 1.0}},
        "n_sequence": [4, 16],
        "horizon_per_n": 1200,
        "burn_in_per_n": 120,
        "replications": 2,
        "seed_root": 99,
        "regulator": {
            "hazard": {"form": "constant", "gamma": 1.0},
            "dt": 0.001,
            "ramp": {"x": 1.0, "b": 0.0, "t_end": 5.0},
            "drain": {
                "b": -1.0,
                "x_grid": [1.0, 2.0, 4.0],
                "delta": 0.5,
                "hazard": {"form": "constant", "gamma": 0.0},
            },
        },
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_validate_ok(config_file, capsys):
    assert main(["validate", "--config", str(config_file)]) == 0
    out = capsys.readouterr().out
    assert "A1: pass" in out
    assert "A2: pass" in out
    assert "A3: pass" in out


def test_validate_failure_exit_code(tmp_path, config_file):
    cfg = json.loads(config_file.read_text())
    cfg["theta"] = 6.0
    cfg["n_sequence"] = [25]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(cfg))
    assert main(["validate", "--config", str(bad)]) == 1


def test_missing_config_is_exit_1(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.json")]) == 1


def test_malformed_config_is_exit_1(tmp_path):
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    assert main(["validate", "--config", str(bad)]) == 1


def test_unknown_flag_is_exit_1(config_file):
    assert main(["validate", "--config", str(config_file), "--bogus"]) == 1


def test_unknown_subcommand_is_exit_1():
    assert main(["frobnicate"]) == 1


def test_limit_outputs(config_file, tmp_path):
    out = tmp_path / "out"
    assert main(["limit", "--config", str(config_file), "--out", str(out), "--quiet"]) == 0
    summary = json.loads((out / "limit.json").read_text())
    assert summary["mean"] == pytest.approx(0.797885, abs=1e-6)
    law = (out / "law.csv").read_text().splitlines()
    assert law[0] == "x,density"
    assert len(law) > 1000


def test_simulate_outputs(config_file, tmp_path):
    out = tmp_path / "sim"
    assert main([
        "simulate", "--config", str(config_file), "--out", str(out), "--n", "4", "--quiet",
    ]) == 0
    rec = json.loads((out / "sim_n4_rep0.json").read_text())
    assert rec["counts"]["arrivals"] == 4800
    samples = (out / "samples_n4.csv").read_text().splitlines()
    assert samples[0] == "scaled_wait"
    assert len(samples) == 2 * (4800 - 480) + 1


def test_compare_outputs_and_round_trip(config_file, tmp_path):
    out = tmp_path / "cmp"
    assert main(["compare", "--config", str(config_file), "--out", str(out), "--quiet"]) == 0
    report = ConvergenceReport.from_json_dict(json.loads((out / "report.json").read_text()))
    assert set(report.per_n) == {4, 16}
    table = (out / "table.csv").read_text().splitlines()
    assert table[0] == "n,ks,metric,estimate,ci_halfwidth,limit,error"
    assert len(table) == 1 + 2 * 4  # two moments + abandon + queue per n
    assert (out / "samples_n4.csv").exists() and (out / "samples_n16.csv").exists()


def test_compare_deterministic_outputs(config_file, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["compare", "--config", str(config_file), "--out", str(out1), "--quiet"]) == 0
    assert main(["compare", "--config", str(config_file), "--out", str(out2), "--quiet"]) == 0
    for name in ("report.json", "law.csv", "samples_n4.csv", "samples_n16.csv", "table.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_seed_override_changes_outputs(config_file, tmp_path):
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    assert main(["compare", "--config", str(config_file), "--out", str(out1), "--quiet"]) == 0
    assert main([
        "compare", "--config", str(config_file), "--out", str(out2), "--seed", "123", "--quiet",
    ]) == 0
    assert (out1 / "samples_n4.csv").read_bytes() != (out2 / "samples_n4.csv").read_bytes()


def test_runtime_error_is_exit_2(tmp_path, config_file):
    cfg = json.loads(config_file.read_text())
    cfg["x0"] = 1e999  # parses to inf, diverges immediately
    bad = tmp_path / "diverge.json"
    bad.write_text(json.dumps(cfg))
    out = tmp_path / "boom"
    assert main(["simulate", "--config", str(bad), "--out", str(out), "--quiet"]) == 2


def test_regulator_subcommand(config_file, tmp_path):
    out = tmp_path / "reg"
    assert main(["regulator", "--config", str(config_file), "--out", str(out), "--quiet"]) == 0
    summary = json.loads((out / "regulator.json").read_text())
    assert summary["residual"] < 1e-3
    assert summary["drain"]["passed"] is True
    z = np.loadtxt(out / "z.csv", delimiter=",", skiprows=1)
    assert abs(z[-1, 1] - np.exp(-5.0)) < 5e-3
