import csv
import json
from pathlib import Path

import pytest

from elltriv.cli import EXIT_FAILED, EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, main
from elltriv.scenario import ScenarioError, load_scenario

SCENARIOS = sorted((Path(__file__).resolve().parent.parent / "scenarios").glob("*.json"))


def write(tmp_path, data, name="sc.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


@pytest.mark.parametrize("path", SCENARIOS, ids=lambda p: p.stem)
def test_shipped_scenarios_pass(path, tmp_path):
    out = tmp_path / "report.json"
    assert main(["run", str(path), "--out", str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["pass"] and report["checks"]
    assert all(c["pass"] for c in report["checks"])


def test_report_is_deterministic(tmp_path):
    path = str(SCENARIOS[0].parent / "abel_fay.json")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["run", path, "--out", str(a)])
    main(["run", path, "--out", str(b)])
    assert a.read_text() == b.read_text()


def test_seed_override_changes_points(tmp_path):
    path = str(SCENARIOS[0].parent / "genus0.json")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["run", path, "--out", str(a)])
    main(["run", path, "--out", str(b), "--seed", "5"])
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    assert rb["seed"] == 5 and ra["results"]["lambdas"] != rb["results"]["lambdas"]


def test_samples_csv(tmp_path, capsys):
    path = str(SCENARIOS[0].parent / "trivialize_jordan.json")
    csv_path = tmp_path / "s.csv"
    code, cap = run(["run", path, "--samples", str(csv_path), "--timings"], capsys)
    assert code == EXIT_OK
    report = json.loads(cap.out)
    with open(csv_path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:2] == ["re_u", "im_u"]
    assert report["samples"]["rows"] == len(rows) - 1
    assert report["samples"]["rows"] + report["samples"]["omitted_near_poles"] == 400
    assert report["timings"]["total_seconds"] > 0


def test_tiny_tolerance_fails(capsys):
    path = str(SCENARIOS[0].parent / "kernels_check.json")
    code, cap = run(["run", path, "--tol", "1e-30"], capsys)
    assert code == EXIT_FAILED
    assert json.loads(cap.out)["pass"] is False


@pytest.mark.parametrize("data", [
    {"pipeline": "nope", "tau": [0, 1]},
    {"pipeline": "theta_check", "tau": [0, -1]},
    {"pipeline": "theta_check", "tau": [0, 1], "config": {"no_such_key": 1}},
    {"pipeline": "solve_first", "tau": [0, 1], "inputs": {}},
])
def test_invalid_input_exit_code(data, tmp_path, capsys):
    code, cap = run(["run", write(tmp_path, data)], capsys)
    assert code == EXIT_INPUT
    assert "invalid input" in cap.err


def test_missing_file_and_missing_samples_block(tmp_path, capsys):
    assert run(["run", str(tmp_path / "absent.json")], capsys)[0] == EXIT_INPUT
    path = str(SCENARIOS[0].parent / "theta_check.json")
    assert run(["run", path, "--samples", str(tmp_path / "x.csv")], capsys)[0] == EXIT_INPUT


def test_indeterminate_gamma_exit_code(tmp_path, capsys):
    data = json.loads((SCENARIOS[0].parent / "gamma_scalar.json").read_text())
    data.setdefault("config", {})["gamma_sv_rtol"] = 0.5
    code, cap = run(["run", write(tmp_path, data)], capsys)
    assert code == EXIT_NUMERIC
    assert "IndeterminateError" in cap.err


def test_load_scenario_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ScenarioError):
        load_scenario(str(bad))
    sc = load_scenario(str(SCENARIOS[0].parent / "genus0.json"), seed=9)
    assert sc.seed == 9
