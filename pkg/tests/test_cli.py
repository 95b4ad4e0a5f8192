import json
import subprocess
import sys

from botmut.cli import main

from conftest import RPS, SUITES, write_suite


def test_validate_ok(capsys):
    assert main(["validate", str(RPS)]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_broken(rps_copy, capsys):
    rules = rps_copy / "data" / "rules.yml"
    rules.write_text(rules.read_text().replace("      - intent: greet\n", ""))
    assert main(["validate", str(rps_copy)]) == 2
    assert "DanglingRuleAction" in capsys.readouterr().out


def test_validate_missing_domain(tmp_path, capsys):
    assert main(["validate", str(tmp_path)]) == 1


def test_mutate(tmp_path, capsys):
    assert main(["mutate", str(RPS), "-o", str(tmp_path / "out")]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "17 mutants generated"
    assert "ChatbotStructure: 6" in out and "Flow: 11" in out
    assert len(json.loads((tmp_path / "out" / "mutants.json").read_text())["mutants"]) == 17


def test_unknown_operator(tmp_path, capsys):
    code = main(["mutate", str(RPS), "-o", str(tmp_path), "--operators", "removeEverything"])
    assert code == 1
    assert "unknown operator" in capsys.readouterr().err


def test_usage_error():
    assert main([]) == 1
    assert main(["analyze", str(RPS)]) == 1


def test_test_command(tmp_path, capsys):
    assert main(["test", str(RPS), "--suite", str(SUITES / "rps"), "--repeat", "2"]) == 0
    assert "4/4 scripts passed (8 executions)" in capsys.readouterr().out
    bad = write_suite(tmp_path / "bad", {"x": "#me\nhello\n#bot intent goodbye\n"})
    assert main(["test", str(RPS), "--suite", str(bad)]) == 3


def test_malformed_script(tmp_path):
    bad = write_suite(tmp_path / "bad", {"x": "#bot intent greet\n"})
    assert main(["test", str(RPS), "--suite", str(bad)]) == 1


def test_analyze_and_report(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["mutate", str(RPS), "-o", str(out)]) == 0
    report = tmp_path / "report.json"
    assert main(["analyze", str(RPS), "--mutants", str(out), "--suite", str(SUITES / "rps"),
                 "--repeat", "1", "-o", str(report)]) == 0
    assert json.loads(report.read_text())["counts"]["Total"]["G"] == 17
    capsys.readouterr()
    assert main(["report", str(report), "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["counts"]["Total"]["G"] == 17


def test_analyze_red_baseline(tmp_path):
    out = tmp_path / "out"
    main(["mutate", str(RPS), "-o", str(out), "--operators", "removeRule"])
    bad = write_suite(tmp_path / "bad", {"x": "#me\nhello\n#bot intent goodbye\n"})
    code = main(["analyze", str(RPS), "--mutants", str(out), "--suite", str(bad),
                 "-o", str(tmp_path / "r.json")])
    assert code == 3


def test_analyze_runner_failure(tmp_path):
    out = tmp_path / "out"
    main(["mutate", str(RPS), "-o", str(out), "--operators", "removeRule"])
    code = main(["analyze", str(RPS), "--mutants", str(out), "--suite", str(SUITES / "rps"),
                 "--runner", "exec:/nonexistent/runner {dir}", "-o", str(tmp_path / "r.json")])
    assert code == 4


def test_mark_equivalent(tmp_path):
    out = tmp_path / "out"
    main(["mutate", str(RPS), "-o", str(out), "--operators", "toggleCarryOverSlots"])
    mid = json.loads((out / "mutants.json").read_text())["mutants"][0]["id"]
    report = tmp_path / "r.json"
    assert main(["analyze", str(RPS), "--mutants", str(out), "--suite", str(SUITES / "rps-botium"),
                 "--mark-equivalent", mid, "-o", str(report)]) == 0
    assert json.loads(report.read_text())["counts"]["Total"]["E"] == 1


def test_jobs_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("BOTMUT_JOBS", "2")
    assert main(["mutate", str(RPS), "-o", str(tmp_path / "out")]) == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "botmut", "validate", str(RPS)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
