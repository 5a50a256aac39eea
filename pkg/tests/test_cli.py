import json

import pytest

from trajeval.cli import EXIT_CONFIG, main


def test_run_golden(tmp_path, capsys):
    out = tmp_path / "r"
    assert main(["run", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "SR=100.00%" in text and "restored=True" in text
    assert (out / "report.json").exists() and (out / "summary.csv").exists()


def test_run_with_failing_agent_still_exits_zero(tmp_path, capsys):
    assert main(["run", "--agent", "early-stopper"]) == 0
    assert "SR=0.00%" in capsys.readouterr().out


def test_eval_reproduces_report(tmp_path, capsys):
    out = tmp_path / "r"
    main(["run", "--agent", "flaky", "--runs", "3", "--noise-prob", "1/5", "--seed", "4", "--out", str(out)])
    capsys.readouterr()
    assert main(["eval", str(out), "--report", str(tmp_path / "again.json")]) == 0
    assert (tmp_path / "again.json").read_text(encoding="utf-8") == (out / "report.json").read_text(encoding="utf-8")


def test_seed_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("TRAJEVAL_SEED", "42")
    main(["run", "--noise-prob", "0.2", "--out", str(tmp_path / "a")])
    assert json.loads((tmp_path / "a" / "report.json").read_text())["seed"] == 42
    main(["run", "--noise-prob", "0.2", "--seed", "5", "--out", str(tmp_path / "b")])
    assert json.loads((tmp_path / "b" / "report.json").read_text())["seed"] == 5


def test_bad_seed_env(monkeypatch, capsys):
    monkeypatch.setenv("TRAJEVAL_SEED", "abc")
    assert main(["run"]) == EXIT_CONFIG


def test_noise_types(tmp_path):
    main(["run", "--noise-prob", "1", "--noise-types", "Repeat", "--out", str(tmp_path / "n")])
    doc = json.loads((tmp_path / "n" / "report.json").read_text())
    assert set(doc["aggregate"]["by_noise_type"]) == {"Repeat"}
    assert doc["config"]["noise"]["enabled_types"] == ["Repeat"]


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--noise-prob", "2"],
        ["run", "--noise-types", "Earthquake", "--noise-prob", "0.5"],
        ["run", "--step-multiplier", "0"],
        ["run", "--tasks", "/nonexistent/tasks.json"],
        ["eval", "/nonexistent/dir"],
        ["report", "--out", "/nonexistent/dir"],
    ],
)
def test_config_errors(argv, capsys):
    assert main(argv) == EXIT_CONFIG
    assert "trajeval: error" in capsys.readouterr().err


def test_bad_task_file(tmp_path):
    p = tmp_path / "tasks.json"
    p.write_text('{"tasks": []}', encoding="utf-8")
    assert main(["run", "--tasks", str(p)]) == EXIT_CONFIG


def test_reset_verb(capsys):
    assert main(["reset"]) == 0
    out = capsys.readouterr().out
    assert "jobs=2 restored=True" in out


def test_report_verb(tmp_path, capsys):
    out = tmp_path / "r"
    main(["run", "--out", str(out)])
    (out / "summary.csv").unlink()
    assert main(["report", "--out", str(out)]) == 0
    assert (out / "summary.csv").read_text().startswith("subset,")


def test_validate_ok(capsys):
    assert main(["validate"]) == 0
    assert capsys.readouterr().out.startswith("ok:")


def test_validate_reports_problems(tmp_path, capsys):
    from conftest import GOLDEN

    golden = json.loads(GOLDEN.read_text(encoding="utf-8"))
    golden["blog_scan"] = golden["blog_scan"][-1:]
    p = tmp_path / "golden.json"
    p.write_text(json.dumps(golden), encoding="utf-8")
    assert main(["validate", "--golden", str(p)]) == 1
    assert "blog_scan" in capsys.readouterr().out
