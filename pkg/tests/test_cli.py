import json

import pytest

from qcsched.cli import main


def _read_bytes(path):
    return path.read_bytes()


def test_gen_is_deterministic(tmp_path, capsys):
    a = tmp_path / "a"
    b = tmp_path / "b"
    args = ["gen", "--chip", "grid:2", "--goals", "2", "--count", "2",
            "--seed", "5", "--label", "t"]
    assert main(args + ["--out-dir", str(a)]) == 0
    assert main(args + ["--out-dir", str(b)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 4
    files_a = sorted(a.glob("*.json"))
    files_b = sorted(b.glob("*.json"))
    assert len(files_a) == 2
    assert [_read_bytes(f) for f in files_a] == \
        [_read_bytes(f) for f in files_b]


def test_gen_density(tmp_path, capsys):
    assert main(["gen", "--chip", "grid:2", "--density", "0.5",
                 "--out-dir", str(tmp_path)]) == 0
    path = capsys.readouterr().out.strip()
    data = json.loads(open(path).read())
    assert len(data["goals"]) == 3


def test_gen_requires_goal_count(tmp_path):
    with pytest.raises(SystemExit):
        main(["gen", "--chip", "grid:2", "--out-dir", str(tmp_path)])


def test_unknown_chip(tmp_path):
    with pytest.raises(SystemExit):
        main(["gen", "--chip", "hexagon-99", "--goals", "1",
              "--out-dir", str(tmp_path)])


def test_solve_validate_gantt_pipeline(tmp_path, capsys):
    assert main(["gen", "--chip", "grid:2", "--goals", "2", "--seed", "1",
                 "--out-dir", str(tmp_path)]) == 0
    instance_path = capsys.readouterr().out.strip()

    out = tmp_path / "runs"
    assert main(["solve", instance_path, "--engine", "cp", "--budget", "5",
                 "--out-dir", str(out)]) == 0
    solve_out = capsys.readouterr().out
    assert "makespan=" in solve_out
    schedules = list(out.glob("*-schedule.json"))
    reports = list(out.glob("*-report.json"))
    assert len(schedules) == 1 and len(reports) == 1

    assert main(["validate", instance_path, str(schedules[0])]) == 0
    assert "valid:" in capsys.readouterr().out

    svg_path = tmp_path / "chart.svg"
    assert main(["gantt", instance_path, str(schedules[0]),
                 "--format", "svg", "--out", str(svg_path)]) == 0
    capsys.readouterr()
    assert svg_path.read_text().startswith("<svg")

    assert main(["gantt", instance_path, str(schedules[0])]) == 0
    assert "makespan=" in capsys.readouterr().out


def test_validate_rejects_corrupted(tmp_path, capsys):
    assert main(["gen", "--chip", "grid:2", "--goals", "1", "--seed", "2",
                 "--out-dir", str(tmp_path)]) == 0
    instance_path = capsys.readouterr().out.strip()
    out = tmp_path / "runs"
    assert main(["solve", instance_path, "--engine", "router",
                 "--budget", "0.2", "--out-dir", str(out)]) == 0
    capsys.readouterr()
    schedule_path = next(out.glob("*-schedule.json"))
    data = json.loads(schedule_path.read_text())
    data["makespan"] += 1           # stored objective no longer matches
    schedule_path.write_text(json.dumps(data))

    assert main(["validate", instance_path, str(schedule_path)]) == 1
    assert "R8" in capsys.readouterr().out

    assert main(["gantt", instance_path, str(schedule_path)]) == 1
    assert "invalid schedule" in capsys.readouterr().err


def test_bench_writes_table(tmp_path, capsys):
    out = tmp_path / "bench"
    args = ["bench", "--chip", "grid:2", "--goals", "1", "--count", "2",
            "--engine", "router", "--engine", "cp", "--budget", "0.2",
            "--variant", "qcc", "--variant", "qcc-x",
            "--out-dir", str(out)]
    assert main(args) == 0
    table = (out / "table.txt").read_text()
    assert table == capsys.readouterr().out
    assert "qcc/s1" in table and "qcc-x/s1" in table
    assert "router" in table and "cp" in table
