import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from satsense.cli import main
from satsense.sweep import CSV_HEADER


def schema(name):
    return json.loads(resources.files("satsense").joinpath("schemas", f"{name}.schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_vacuum_has_no_information(capsys):
    code, out, _ = run(capsys, "eval", "--T", "2", "--n-sat", "1", "--delta-bar", "0", "--R", "0",
                       "--theta", "0", "--r", "0", "--psi", "0", "--target", "od")
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, schema("eval"))
    assert data["fisher"]["value"] == 0.0


def test_eval_coherent_has_no_variance_term(capsys):
    code, out, _ = run(capsys, "eval", "--T", "1", "--n-sat", "1", "--delta-bar", "1", "--R", "1",
                       "--theta", "0.25", "--r", "0", "--psi", "0", "--target", "detuning")
    assert code == 0
    data = json.loads(out)
    assert data["fisher"]["var_term"] == 0.0
    assert data["fisher"]["value"] > 0
    assert data["v"] == 1.0


def test_eval_rejects_negative_squeezing(capsys):
    code, _, err = run(capsys, "eval", "--T", "1", "--n-sat", "1", "--r", "-1", "--target", "od")
    assert code == 2
    assert "r must be ≥ 0" in err


@pytest.mark.parametrize("argv", [
    ["eval", "--T", "0", "--n-sat", "1", "--target", "od"],
    ["eval", "--T", "1", "--n-sat", "1", "--target", "phase"],
    ["eval", "--T", "nan", "--n-sat", "1", "--target", "od"],
    ["frobnicate"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_optimize_unit_medium(capsys, tmp_path):
    path = tmp_path / "adv.json"
    code, _, _ = run(capsys, "optimize", "--T", "1", "--n-sat", "1", "--target", "detuning",
                     "--json-out", str(path))
    data = json.loads(path.read_text())
    jsonschema.validate(data, schema("advantage"))
    assert data["advantage"] >= 1 - 1e-6
    # the squeezed optimum runs to the squeezing bound here, which is reported as exit 3
    assert code == (3 if data["boundary_flag"] else 0)


def test_optimize_linear_medium_exits_on_boundary(capsys):
    code, out, _ = run(capsys, "optimize", "--T", "1", "--n-sat", "1e12", "--target", "detuning")
    assert code == 3
    data = json.loads(out)
    assert data["boundary_flag"] is True


def test_optimize_single_family(capsys):
    code, out, _ = run(capsys, "optimize", "--T", "1", "--n-sat", "1", "--target", "detuning",
                       "--family", "coherent")
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, schema("optimization"))
    assert data["regime"] == "coherent_res"


def test_sweep_csv_layout_and_determinism(capsys):
    argv = ["sweep", "--n-sat-min", "0.1", "--n-sat-max", "10", "--n-sat-points", "2",
            "--T-min", "0.5", "--T-max", "5", "--T-points", "2", "--n-starts", "16", "--quiet"]
    code, first, err = run(capsys, *argv, "--threads", "1")
    assert code == 0
    lines = first.splitlines()
    assert len(lines) == 5
    assert lines[0] == ",".join(CSV_HEADER)
    assert "cells flagged" in err
    _, second, _ = run(capsys, *argv, "--threads", "4")
    assert first == second


def test_sweep_json_and_grid_file(capsys, tmp_path):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"n_sat": {"min": 1, "max": 1, "points": 1},
                                "T": {"min": 1, "max": 1, "points": 1}, "target": "detuning"}))
    out = tmp_path / "t.json"
    code, _, _ = run(capsys, "sweep", "--grid", str(grid), "--format", "json", "--out", str(out),
                     "--quiet", "--n-starts", "16")
    assert code == 0
    data = json.loads(out.read_text())
    jsonschema.validate(data, schema("sweep"))
    assert len(data["cells"]) == 1


def test_sweep_invalid_grid(capsys):
    code, _, _ = run(capsys, "sweep", "--n-sat-min", "5", "--n-sat-max", "1", "--quiet")
    assert code == 2


def test_simulate_location_hook(capsys):
    argv = ["simulate", "--hook", "normal-location", "--samples", "100", "--reps", "10000",
            "--seed", "3"]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, schema("estimator"))
    assert data["crb_ratio"] == pytest.approx(1.0, rel=0.05)
    _, again, _ = run(capsys, *argv, "--threads", "3")
    assert again == out


def test_simulate_full_model_information(capsys):
    code, out, _ = run(capsys, "simulate", "--T", "1", "--n-sat", "1", "--coherent-optimum",
                       "--samples", "200000", "--reps", "20", "--seed", "5")
    assert code == 0
    data = json.loads(out)
    assert abs(data["empirical_fisher"] - data["analytic_fisher"]) < 3 * data["empirical_fisher_se"]


def test_simulate_bracket_failure(capsys):
    code, out, _ = run(capsys, "simulate", "--hook", "normal-location", "--samples", "10",
                       "--reps", "200", "--bracket", "-0.01", "0.01")
    assert code == 1
    assert json.loads(out)["edge_fraction"] > 0.01


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"T": 1, "n-sat": 1, "R": 1, "theta": 0.25, "delta-bar": 1,
                               "target": "detuning"}))
    code, out, _ = run(capsys, "eval", "--config", str(cfg))
    assert code == 0
    base = json.loads(out)
    _, direct, _ = run(capsys, "eval", "--T", "1", "--n-sat", "1", "--R", "1", "--theta", "0.25",
                       "--delta-bar", "1", "--target", "detuning")
    assert base == json.loads(direct)
    # explicit flags win over the file
    _, out, _ = run(capsys, "eval", "--config", str(cfg), "--R", "2")
    _, direct, _ = run(capsys, "eval", "--T", "1", "--n-sat", "1", "--R", "2", "--theta", "0.25",
                       "--delta-bar", "1", "--target", "detuning")
    assert json.loads(out) == json.loads(direct) != base


def test_config_file_rejects_unknown_keys(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"T": 1, "n-sat": 1, "colour": "blue", "target": "od"}))
    code, _, err = run(capsys, "eval", "--config", str(cfg))
    assert code == 2
    assert "colour" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "satsense", "eval", "--T", "1", "--n-sat", "1",
                           "--R", "1", "--target", "od"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["fisher"]["value"] > 0
