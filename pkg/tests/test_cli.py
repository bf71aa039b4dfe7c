import json

import numpy as np
import pytest

from conenav.cli import main
from conenav.world import (
    DiscObstacle,
    World,
    Workspace,
    world_to_dict,
)


@pytest.fixture
def world_file(tmp_path):
    w = World(
        workspace=Workspace(10.0),
        obstacles=[DiscObstacle(id=1, center=np.array([3.0, 0.0]), radius=1.0)],
    )
    path = tmp_path / "world.json"
    path.write_text(json.dumps(world_to_dict(w, destination=[0.0, 0.0])))
    return path


@pytest.fixture
def bad_world_file(tmp_path):
    w = World(
        workspace=Workspace(10.0),
        obstacles=[
            DiscObstacle(id=1, center=np.array([3.0, 0.0]), radius=1.0),
            DiscObstacle(id=2, center=np.array([4.0, 0.0]), radius=1.0),
        ],
    )
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(world_to_dict(w, destination=[0.0, 0.0])))
    return path


def test_validate_ok(world_file, capsys):
    assert main(["validate", str(world_file)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc == {"ok": True, "violations": 0}


def test_validate_failure_exit_code(bad_world_file, capsys):
    assert main(["validate", str(bad_world_file)]) == 1
    captured = capsys.readouterr()
    assert json.loads(captured.out)["ok"] is False
    assert "overlap" in captured.err


def test_run_writes_trajectory(world_file, tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code = main(
        ["run", str(world_file), "--x0", "6.0,0.5", "--out", str(out), "--step", "1e-3"]
    )
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["outcome"] == "converged"
    assert out.exists()
    header = out.read_text().splitlines()[0]
    assert header.startswith("t,x1,x2,u1,u2,mode")


def test_run_missing_x0_is_usage_error(world_file):
    with pytest.raises(SystemExit) as exc:
        main(["run", str(world_file)])
    assert exc.value.code == 3


def test_run_bad_start_is_runtime_error(world_file, capsys):
    code = main(["run", str(world_file), "--x0", "3.0,0.0"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_batch_random_worlds(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(
        [
            "batch",
            "--random", "1",
            "--obstacles", "3",
            "--starts", "2",
            "--oracle",
            "--seed", "5",
            "--step", "1e-3",
            "--perturb",
            "--out", str(out),
        ]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["runs"]) == 2
    agg = json.loads(capsys.readouterr().out.splitlines()[0])
    assert agg["world"] == 0


def test_analyze(world_file, tmp_path, capsys):
    out = tmp_path / "eq.json"
    assert main(["analyze", str(world_file), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["assumption3"] is True


def test_plot_svg(world_file, tmp_path):
    out = tmp_path / "plot.svg"
    assert main(["plot", str(world_file), "--out", str(out)]) == 0
    assert out.read_text().lstrip().startswith("<?xml")


def test_unknown_command_usage_exit():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 3
