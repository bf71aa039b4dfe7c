import csv
import json

import numpy as np
import pytest

from conenav.simulator import (
    SimConfig,
    batch,
    integrate,
    report_to_json,
    sample_free_point,
    trajectory_to_csv,
)
from conenav.world import DiscObstacle, World, Workspace, random_world


def test_empty_world_straight_line():
    w = World(workspace=Workspace(10.0), obstacles=[])
    traj = integrate(w, np.array([-4.0, 1.0]), np.array([3.0, 1.0]), SimConfig())
    assert traj.outcome == "converged"
    # integration stops at distance e_c from the goal; the realized path
    # plus that gap is the straight-line length
    gap = np.linalg.norm(traj.x[-1] - np.array([3.0, 1.0]))
    assert traj.path_length + gap == pytest.approx(7.0, abs=1e-6)
    assert traj.min_clearance > 0.0


def test_stall_on_antipodal_ray(single_disc_world):
    cfg = SimConfig(t_max=20.0)
    traj = integrate(single_disc_world, np.array([6.0, 0.0]), np.zeros(2), cfg)
    assert traj.outcome == "stalled_at_equilibrium"
    assert not traj.perturbed


def test_perturbation_escapes_stall(single_disc_world):
    cfg = SimConfig(perturb_on_stall=True, seed=7, h=1e-3)
    traj = integrate(single_disc_world, np.array([6.0, 0.0]), np.zeros(2), cfg)
    assert traj.outcome == "converged"
    assert traj.perturbed


def test_t_max_exceeded(single_disc_world):
    cfg = SimConfig(t_max=0.05)
    traj = integrate(single_disc_world, np.array([8.0, 1.0]), np.zeros(2), cfg)
    assert traj.outcome == "t_max_exceeded"


def test_start_inside_obstacle_raises(single_disc_world):
    with pytest.raises(ValueError):
        integrate(single_disc_world, np.array([3.0, 0.0]), np.zeros(2), SimConfig())


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(h=-1.0)
    with pytest.raises(ValueError):
        SimConfig(controller="teleport")


def test_step_halving_converges_in_length(reference_world):
    # halving h changes the realized path length by well under 0.1%
    x0 = np.array([-8.0, -3.0])
    assert reference_world.in_free_space(x0)
    coarse = integrate(reference_world, x0, np.zeros(2), SimConfig(h=1e-2))
    fine = integrate(reference_world, x0, np.zeros(2), SimConfig(h=5e-3))
    assert coarse.outcome == fine.outcome == "converged"
    assert abs(coarse.path_length - fine.path_length) / fine.path_length < 1e-3


def test_forward_invariance_and_convergence():
    # random worlds, random starts: trajectories stay in free space and
    # essentially always converge (h small enough that a near-tangent
    # pass does not discretize into the obstacle)
    converged = 0
    total = 0
    for seed in range(6):
        w = random_world(seed=seed, m=5, r0=10.0, keep_clear=[((0.0, 0.0), 0.5)])
        rng = np.random.default_rng(seed + 100)
        for _ in range(5):
            x0 = sample_free_point(w, np.zeros(2), rng, min_dist=3.0)
            traj = integrate(w, x0, np.zeros(2), SimConfig(perturb_on_stall=True, seed=seed, h=1e-3))
            total += 1
            assert traj.min_clearance >= -1e-6 * w.r0
            converged += int(traj.outcome == "converged")
    assert converged / total >= 0.99


def test_sensor_loop_converges(single_disc_world):
    cfg = SimConfig(controller="sensor", t_max=60.0, corner_radius=0.05)
    traj = integrate(single_disc_world, np.array([6.0, 0.5]), np.zeros(2), cfg)
    assert traj.outcome == "converged"
    assert traj.min_clearance >= -1e-6 * single_disc_world.r0


def test_unicycle_respects_limits(single_disc_world):
    cfg = SimConfig(controller="unicycle_sensor", t_max=120.0, corner_radius=0.05)
    traj = integrate(single_disc_world, np.array([6.0, 0.5]), np.zeros(2), cfg)
    assert traj.outcome == "converged"
    assert np.all(np.abs(traj.v) <= 0.26 + 1e-12)
    assert np.all(np.abs(traj.omega) <= 1.82 + 1e-12)


def test_batch_report_deterministic(tmp_path):
    items = [(random_world(seed=3, m=3, r0=10.0, keep_clear=[((0.0, 0.0), 0.5)]), np.zeros(2))]
    cfg = SimConfig(seed=11, perturb_on_stall=True, h=1e-3)
    pa, pb = tmp_path / "a.json", tmp_path / "b.json"
    report_to_json(batch(items, cfg, starts_per_world=3), str(pa))
    report_to_json(batch(items, cfg, starts_per_world=3), str(pb))
    assert pa.read_bytes() == pb.read_bytes()
    doc = json.loads(pa.read_text())
    assert len(doc["runs"]) == 3
    assert all(r["error"] is None for r in doc["runs"])
    assert doc["aggregates"]["per_world"][0]["match_rate"] >= 0.0


def test_trajectory_csv(tmp_path, single_disc_world):
    cfg = SimConfig()
    traj = integrate(single_disc_world, np.array([6.0, 0.5]), np.zeros(2), cfg)
    path = tmp_path / "traj.csv"
    trajectory_to_csv(traj, str(path), world=single_disc_world, config=cfg, x_d=np.zeros(2))
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:6] == ["t", "x1", "x2", "u1", "u2", "mode"]
    assert len(rows) == 1 + len(traj.t)
    assert float(rows[1][1]) == pytest.approx(6.0)
