import json

from qmlab.cli import main


def test_verify_writes_report(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "cs,hpdelta", "--trials", "5", "--seed", "7", "--report", str(out)]) == 0
    rec = json.loads(out.read_text())
    assert rec["passed"] and [s["id"] for s in rec["suites"]] == ["cs", "hpdelta"]


def test_verify_failure_exit_code(tmp_path):
    out = tmp_path / "r.csv"
    code = main(["verify", "--suite", "cs", "--trials", "10", "--inject-bug", "cs", "--format", "csv", "--report", str(out)])
    assert code == 1
    assert "failure,cs" in out.read_text()


def test_usage_errors():
    assert main(["verify", "--suite", "nope"]) == 2
    assert main(["sigma-curve", "--eps", "0:0.6:0.1"]) == 2


def test_scenario_and_sigma_curve(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert main(["scenario", "example7", "--eps", "0:0.1:0.05", "--report", str(out)]) == 0
    assert json.loads(out.read_text())["scenario"] == "example7"
    assert main(["sigma-curve", "--eps", "0:0.1:0.1"]) == 0
    assert capsys.readouterr().out.startswith("eps,sigma")
