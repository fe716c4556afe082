import json
import subprocess
import sys

import pytest

from appletasting.harness.cli import main

SMALL = {
    "problem": {"id": "i", "T": 30},
    "policies": [{"type": "pgts", "M": 2}, {"type": "egreedy"}],
    "reps": 2,
    "seed": 4,
}


@pytest.fixture
def cfg_path(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(SMALL))
    return path


def test_list_problems(capsys):
    assert main(["list-problems"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [line.split()[0] for line in out] == ["i", "ii", "iii"]


def test_validate_ok(cfg_path, capsys):
    assert main(["validate", "--config", str(cfg_path)]) == 0
    assert capsys.readouterr().out.startswith("ok")


def test_validate_reports_bad_field(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({**SMALL, "bogus": 1}))
    assert main(["validate", "--config", str(path)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["validate", "--config", str(tmp_path / "nope.json")]) == 1
    assert "error" in capsys.readouterr().err


def test_run_with_overrides(cfg_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg_path), "--out", str(out), "--seed", "9", "--reps", "1"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["reps"] == 1
    assert json.loads((out / "config.json").read_text())["seed"] == 9
    assert set(summary["policies"]) == {"pg-ts", "eps-greedy-0.1"}
    assert json.loads(capsys.readouterr().out)["reps"] == 1


def test_sweep_command(cfg_path, tmp_path, capsys):
    out = tmp_path / "sw"
    assert main(["sweep", "--config", str(cfg_path), "--axis", "M", "--values", "1,3", "--out", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("axis,value,policy")
    assert len(lines) == 1 + 2 * 2


def test_bad_axis_is_rejected(cfg_path, tmp_path):
    with pytest.raises(SystemExit):
        main(["sweep", "--config", str(cfg_path), "--axis", "T", "--values", "1", "--out", str(tmp_path)])


def test_module_entry_point(cfg_path):
    proc = subprocess.run([sys.executable, "-m", "appletasting", "validate", "--config", str(cfg_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("ok")
