import csv
import json

import pytest

from ffzne.cli import main
from ffzne.report import ReportFieldError, emit_plot_data, flatten_reports


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture()
def workspace(tmp_path, capsys):
    dev = tmp_path / "dev.json"
    circ = tmp_path / "c.json"
    assert run(["device", "gen", "--rows", 2, "--cols", 2, "--eps2", 0.03, "--seed", 4, "-o", dev], capsys)[0] == 0
    assert run(["circuit", "gen", "--family", "brickwork", "--n", 6, "--reps", 4, "--seed", 2, "-o", circ], capsys)[0] == 0
    return tmp_path


def test_device_validate(workspace, capsys):
    code, out, _ = run(["device", "validate", workspace / "dev.json"], capsys)
    assert code == 0
    bad = json.loads((workspace / "dev.json").read_text())
    bad["two_qubit_error"][next(iter(bad["two_qubit_error"]))] = 1.2
    (workspace / "bad.json").write_text(json.dumps(bad))
    code, _, err = run(["device", "validate", workspace / "bad.json"], capsys)
    assert code == 2
    doc = json.loads(err)
    assert doc["exit_code"] == 2 and doc["error"] and doc["message"]


def test_layout_pipeline_commands(workspace, capsys):
    w = workspace
    assert run(["layouts", "enum", "--device", w / "dev.json", "--circuit", w / "c.json", "-o", w / "l.json"], capsys)[0] == 0
    argv = ["layouts", "score", "--method", "qic", "--device", w / "dev.json", "--circuit", w / "c.json", "--layouts", w / "l.json", "-o", w / "s.json"]
    assert run(argv, capsys)[0] == 0
    scores = json.loads((w / "s.json").read_text())
    assert set(scores) == {"method", "entries", "mean", "stddev"}
    assert run(["layouts", "select", "--scores", w / "s.json", "--strategy", "exhaustive", "-o", w / "t.json"], capsys)[0] == 0
    triple = json.loads((w / "t.json").read_text())
    s1, si, sj = triple["scores"]
    assert s1 <= si <= sj and triple["method"] == "exhaustive"
    code, out, _ = run(["expval", "--circuit", w / "c.json", "--device", w / "dev.json", "--layouts", w / "l.json", "--layout", 0], capsys)
    assert code == 0 and 0 < json.loads(out)["mean"] < 1


def test_run_commands_are_byte_identical(workspace, capsys):
    w = workspace
    for name in ("a", "b"):
        argv = ["run", "ffzne", "--circuit", w / "c.json", "--device", w / "dev.json", "--score", "fp", "--no-timings", "-o", w / f"{name}.json"]
        assert run(argv, capsys)[0] == 0
    assert (w / "a.json").read_bytes() == (w / "b.json").read_bytes()
    report = json.loads((w / "a.json").read_text())
    assert report["method"] == "ffzne" and report["executions"] == 3
    argv = ["run", "zne", "--circuit", w / "c.json", "--device", w / "dev.json", "--lambdas", "1,3,5", "--extrapolator", "exp", "-o", w / "z.json"]
    assert run(argv, capsys)[0] == 0
    assert json.loads((w / "z.json").read_text())["noise_factors"] == [1.0, 3.0, 5.0]


def test_exit_codes(workspace, capsys):
    w = workspace
    code, _, err = run(["run", "zne", "--circuit", w / "c.json", "--device", w / "dev.json", "--lambdas", "1"], capsys)
    assert code == 2 and json.loads(err)["exit_code"] == 2
    code, _, err = run(["run", "ffzne", "--circuit", w / "missing.json", "--device", w / "dev.json"], capsys)
    assert code == 2
    # a 3-qubit line device admits too few layouts for a 3-qubit path
    assert run(["device", "gen", "--topology", "line", "--n", 3, "-o", w / "line.json"], capsys)[0] == 0
    assert run(["circuit", "gen", "--family", "su2", "--n", 3, "-o", w / "p.json"], capsys)[0] == 0
    code, _, err = run(["run", "ffzne", "--circuit", w / "p.json", "--device", w / "line.json"], capsys)
    assert code == 3 and "insufficient layouts" in json.loads(err)["message"]


def test_global_flags_either_side(workspace, capsys):
    w = workspace
    a = run(["--seed", 3, "device", "gen", "--topology", "line", "--n", 5], capsys)[1]
    b = run(["device", "gen", "--topology", "line", "--n", 5, "--seed", 3], capsys)[1]
    assert a == b


def test_report_commands(workspace, capsys):
    w = workspace
    argv = ["run", "ffzne", "--circuit", w / "c.json", "--device", w / "dev.json", "-o", w / "r.json"]
    assert run(argv, capsys)[0] == 0
    code, out, _ = run(["report", "csv", w / "r.json"], capsys)
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["family", "n", "reps", "method", "score_method", "estimate", "ideal", "deviation_pct"]
    assert len(rows) == 2
    assert run(["report", "plotdata", w / "r.json", "--out-dir", w / "plots"], capsys)[0] == 0
    extrap = list(csv.DictReader((w / "plots" / "extrapolation.csv").open()))
    assert sum(r["kind"] == "data" for r in extrap) == 3
    assert sum(r["kind"] == "fit" for r in extrap) == 50
    budget = (w / "plots" / "budget.csv").read_text().splitlines()
    assert budget == ["method,executions", "ffzne,3", "exhaustive-zne,28"]
    first = {p.name: p.read_bytes() for p in (w / "plots").iterdir()}
    run(["report", "plotdata", w / "r.json", "--out-dir", w / "plots"], capsys)
    assert first == {p.name: p.read_bytes() for p in (w / "plots").iterdir()}


def test_report_missing_field_named(tmp_path):
    with pytest.raises(ReportFieldError, match="estimate"):
        flatten_reports([{"method": "ffzne", "ideal": 1.0, "deviation_pct": 0.0}])
    with pytest.raises(ReportFieldError, match="points"):
        emit_plot_data([{"method": "ffzne", "extrapolation": {}}], tmp_path)
