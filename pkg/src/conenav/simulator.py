"""Closed-loop integration and batch experiment harness.

Fixed-step RK4 on the single integrator (forward Euler for the unicycle,
whose heading enters discontinuously through the velocity transform).
Disc worlds driven by the map controller without noise take a compiled
fast path that integrates whole trajectories in one call.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import _kernels
from .controller_map import ControlParams, control
from .controller_sensor import (
    LidarSpec,
    UnicycleParams,
    sensor_control,
    unicycle_transform,
)
from .tvg import build_tvg, path_match, rld, shortest_path
from .world import World

STALL_LIMIT = 100
SAFETY_FACTOR = 1e-6
PERTURB_FACTOR = 1e-3

OUTCOME_CONVERGED = "converged"
OUTCOME_STALLED = "stalled_at_equilibrium"
OUTCOME_TIMEOUT = "t_max_exceeded"
OUTCOME_SAFETY = "safety_violation"

_STATUS_OUTCOME = {
    0: OUTCOME_CONVERGED,
    1: OUTCOME_STALLED,
    2: OUTCOME_TIMEOUT,
    3: OUTCOME_SAFETY,
}


@dataclass
class SimConfig:
    controller: str = "map"  # map | single_obstacle | sensor | unicycle_sensor
    params: ControlParams = field(default_factory=ControlParams)
    lidar: LidarSpec = field(default_factory=LidarSpec)
    unicycle: UnicycleParams = field(default_factory=UnicycleParams)
    h: Optional[float] = None  # default: 1e-3 * r0 / gamma
    t_max: Optional[float] = None  # default: 50 / gamma
    perturb_on_stall: bool = False
    seed: int = 0
    pose_noise_pos: float = 0.0
    pose_noise_heading: float = 0.0
    sensor_noise_sigma: float = 0.0
    corner_radius: Optional[float] = None
    initial_heading: float = 0.0

    def __post_init__(self):
        if self.h is not None and self.h <= 0:
            raise ValueError("step size must be positive")
        if self.t_max is not None and self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.controller not in ("map", "single_obstacle", "sensor", "unicycle_sensor"):
            raise ValueError(f"unknown controller kind {self.controller!r}")

    def step(self, world: World) -> float:
        return self.h if self.h is not None else 1e-3 * world.r0 / self.params.gamma

    def horizon(self) -> float:
        return self.t_max if self.t_max is not None else 50.0 / self.params.gamma

    def tol_eq(self, world: World) -> float:
        return 1e-8 * self.params.gamma * world.r0


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray  # (steps+1, n)
    outcome: str
    clearance: np.ndarray
    perturbed: bool = False
    u: Optional[np.ndarray] = None
    modes: Optional[List[str]] = None
    active_ids: Optional[List[List[int]]] = None
    psi: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    omega: Optional[np.ndarray] = None

    @property
    def path_length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.x, axis=0), axis=1)))

    @property
    def min_clearance(self) -> float:
        return float(np.min(self.clearance))


def _clearances(world: World, xs: np.ndarray) -> np.ndarray:
    if world.kind == "disc":
        centers, radii = world.disc_arrays()
        c = world.r0 - np.linalg.norm(xs, axis=1)
        for ctr, r in zip(centers, radii):
            c = np.minimum(c, np.linalg.norm(xs - ctr, axis=1) - r)
        return c
    return np.array([world.clearance(x) for x in xs])


def _perturbation(rng, n: int, r0: float) -> np.ndarray:
    d = rng.normal(size=n)
    return PERTURB_FACTOR * r0 * d / np.linalg.norm(d)


def integrate(world: World, x0, x_d, config: SimConfig) -> Trajectory:
    x0 = np.asarray(x0, dtype=float)
    x_d = np.asarray(x_d, dtype=float)
    if not world.in_free_space(x0):
        raise ValueError("start position is not in free space")
    if config.controller in ("map", "single_obstacle"):
        if world.kind != "disc":
            raise ValueError("the map-based controller requires a disc world")
        return _integrate_map(world, x0, x_d, config)
    return _integrate_sensor(world, x0, x_d, config)


def _integrate_map(world: World, x0, x_d, config: SimConfig) -> Trajectory:
    h = config.step(world)
    max_steps = int(math.ceil(config.horizon() / h))
    tol_eq = config.tol_eq(world)
    centers, radii = world.disc_arrays()
    rng = np.random.default_rng(config.seed)

    if config.pose_noise_pos > 0:
        return _integrate_map_noisy(world, x0, x_d, config, h, max_steps, tol_eq, rng)

    pieces = []
    x = x0
    perturbed = False
    remaining = max_steps
    while True:
        traj, status = _kernels.simulate_disc_world(
            x,
            x_d,
            centers,
            radii,
            world.r0,
            gamma=config.params.gamma,
            h=h,
            max_steps=remaining,
            e_c=config.params.e_c,
            tol_eq=tol_eq,
            stall_limit=STALL_LIMIT,
            max_depth=max(config.params.max_depth, len(radii) + 1),
        )
        pieces.append(traj)
        remaining -= len(traj) - 1
        if status == 1 and config.perturb_on_stall and not perturbed and remaining > 0:
            perturbed = True
            cand = traj[-1] + _perturbation(rng, len(x0), world.r0)
            if world.in_free_space(cand):
                x = cand
                pieces.append(cand[None, :])
                continue
        break
    xs = np.vstack([p if i == 0 else p[1:] if len(p) > 1 else p for i, p in enumerate(pieces)])
    t = np.arange(len(xs)) * h
    return Trajectory(
        t=t,
        x=xs,
        outcome=_STATUS_OUTCOME[status],
        clearance=_clearances(world, xs),
        perturbed=perturbed,
    )


def _integrate_map_noisy(world, x0, x_d, config, h, max_steps, tol_eq, rng):
    centers, radii = world.disc_arrays()
    gamma = config.params.gamma
    depth = max(config.params.max_depth, len(radii) + 1)
    xs = [x0.copy()]
    us = []
    x = x0.copy()
    stall = 0
    perturbed = False
    outcome = OUTCOME_TIMEOUT

    def f(q, noise):
        u, _ = _kernels.control_disc_world(q + noise, x_d, centers, radii, gamma, depth)
        return u

    for _ in range(max_steps):
        if np.linalg.norm(x - x_d) <= config.params.e_c:
            outcome = OUTCOME_CONVERGED
            break
        noise = rng.normal(0.0, config.pose_noise_pos, size=len(x))
        k1 = f(x, noise)
        us.append(k1)
        if np.linalg.norm(k1) <= tol_eq:
            stall += 1
            if stall >= STALL_LIMIT:
                if config.perturb_on_stall and not perturbed:
                    perturbed = True
                    stall = 0
                    cand = x + _perturbation(rng, len(x), world.r0)
                    if world.in_free_space(cand):
                        x = cand
                        xs.append(x.copy())
                        continue
                outcome = OUTCOME_STALLED
                break
        else:
            stall = 0
        k2 = f(x + 0.5 * h * k1, noise)
        k3 = f(x + 0.5 * h * k2, noise)
        k4 = f(x + h * k3, noise)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        xs.append(x.copy())
        if world.clearance(x) < -SAFETY_FACTOR * world.r0:
            outcome = OUTCOME_SAFETY
            break
    xs = np.array(xs)
    return Trajectory(
        t=np.arange(len(xs)) * h,
        x=xs,
        outcome=outcome,
        clearance=_clearances(world, xs),
        perturbed=perturbed,
        u=np.array(us) if us else None,
    )


def _integrate_sensor(world: World, x0, x_d, config: SimConfig) -> Trajectory:
    h = config.step(world)
    max_steps = int(math.ceil(config.horizon() / h))
    tol_eq = config.tol_eq(world)
    rng = np.random.default_rng(config.seed)
    spec = config.lidar
    if config.sensor_noise_sigma > 0 and spec.noise_sigma_range == 0:
        spec = LidarSpec(
            resolution_deg=spec.resolution_deg,
            R=spec.R,
            noise_sigma_range=config.sensor_noise_sigma,
            min_range=spec.min_range,
        )
    noise_rng = rng if spec.noise_sigma_range > 0 else None
    unicycle = config.controller == "unicycle_sensor"

    def eval_u(q):
        noisy = q
        if config.pose_noise_pos > 0:
            noisy = q + rng.normal(0.0, config.pose_noise_pos, size=2)
        out = sensor_control(
            noisy,
            x_d,
            world,
            spec,
            config.params,
            rng=noise_rng,
            corner_radius=config.corner_radius,
        )
        return out.u, out.mode, (out.cone.active_arc if out.cone else None)

    xs = [x0.copy()]
    us, modes, active = [], [], []
    psis, vs, ws = [], [], []
    x = x0.copy()
    psi = config.initial_heading
    stall = 0
    perturbed = False
    kicks = 0
    outcome = OUTCOME_TIMEOUT
    for _ in range(max_steps):
        if np.linalg.norm(x - x_d) <= config.params.e_c:
            outcome = OUTCOME_CONVERGED
            break
        u1, mode, arc = eval_u(x)
        us.append(u1)
        modes.append(mode)
        active.append([arc] if arc is not None else [])
        if np.linalg.norm(u1) <= tol_eq:
            stall += 1
            if stall >= STALL_LIMIT:
                # beam quantization flattens the escape gradient in a band
                # of width ~ d*dtheta around the equilibrium ray, so a
                # fixed-size kick can land back inside it; escalate instead
                if config.perturb_on_stall and kicks < 6:
                    stall = 0
                    cand = x + (2.0 ** kicks) * _perturbation(rng, 2, world.r0)
                    kicks += 1
                    if world.in_free_space(cand):
                        perturbed = True
                        x = cand
                        xs.append(x.copy())
                        psis.append(psi)
                        vs.append(0.0)
                        ws.append(0.0)
                    continue
                outcome = OUTCOME_STALLED
                break
        else:
            stall = 0
        if unicycle:
            noisy_psi = psi
            if config.pose_noise_heading > 0:
                noisy_psi = psi + float(rng.normal(0.0, config.pose_noise_heading))
            v, w = unicycle_transform(u1, noisy_psi, config.unicycle)
            x = x + h * v * np.array([math.cos(psi), math.sin(psi)])
            psi = psi + h * w
            psis.append(psi)
            vs.append(v)
            ws.append(w)
        else:
            k2, _, _ = eval_u(x + 0.5 * h * u1)
            k3, _, _ = eval_u(x + 0.5 * h * k2)
            k4, _, _ = eval_u(x + h * k3)
            x = x + (h / 6.0) * (u1 + 2 * k2 + 2 * k3 + k4)
        xs.append(x.copy())
        if world.clearance(x) < -SAFETY_FACTOR * world.r0:
            outcome = OUTCOME_SAFETY
            break
    xs = np.array(xs)
    return Trajectory(
        t=np.arange(len(xs)) * h,
        x=xs,
        outcome=outcome,
        clearance=_clearances(world, xs),
        perturbed=perturbed,
        u=np.array(us) if us else None,
        modes=modes or None,
        active_ids=active or None,
        psi=np.array(psis) if psis else None,
        v=np.array(vs) if vs else None,
        omega=np.array(ws) if ws else None,
    )


@dataclass
class ExperimentReport:
    runs: List[dict]
    aggregates: dict

    def to_dict(self) -> dict:
        return {"runs": self.runs, "aggregates": self.aggregates}


def sample_free_point(world: World, x_d, rng, min_dist: float) -> np.ndarray:
    """A uniform random free-space point at least min_dist from x_d."""
    x_d = np.asarray(x_d, dtype=float)
    n = world.n
    for _ in range(100_000):
        q = rng.uniform(-world.r0, world.r0, size=n)
        if np.linalg.norm(q) > world.r0 - 0.05 * world.r0:
            continue
        if not world.in_free_space(q, tol=-0.05):
            continue
        if np.linalg.norm(q - x_d) < min_dist:
            continue
        return q
    raise RuntimeError("could not sample a free start position")


def batch(
    items,
    config: SimConfig,
    starts_per_world: int,
    oracle: bool = True,
    match_tol: float = 0.005,
) -> ExperimentReport:
    """Run ``starts_per_world`` seeded trajectories per (world, x_d) pair.

    With the oracle enabled, each run is compared against the exact
    shortest path; the controller's effective length adds the final gap
    to the destination so truncation at e_c does not bias the comparison.
    Per-run errors are recorded, never raised.
    """
    runs = []
    per_world = []
    for w_idx, (world, x_d) in enumerate(items):
        rng = np.random.default_rng([config.seed, w_idx])
        matches, rlds, errors = 0, [], 0
        counted = 0
        for r_idx in range(starts_per_world):
            x0 = sample_free_point(world, x_d, rng, min_dist=0.3 * world.r0)
            run_config = SimConfig(**{**config.__dict__, "seed": int(rng.integers(2**31))})
            row = {
                "world": w_idx,
                "run": r_idx,
                "x0": [float(v) for v in x0],
                "error": None,
            }
            try:
                traj = integrate(world, x0, x_d, run_config)
                row["outcome"] = traj.outcome
                row["path_length"] = traj.path_length
                row["min_clearance"] = traj.min_clearance
                row["perturbed"] = traj.perturbed
                if oracle:
                    length = shortest_path(build_tvg(world, x0, x_d)).length
                    controller_length = traj.path_length + float(
                        np.linalg.norm(traj.x[-1] - x_d)
                    )
                    row["oracle_length"] = length
                    row["controller_length"] = controller_length
                    row["rld"] = rld(controller_length, length)
                    row["match"] = path_match(controller_length, length, match_tol)
                    if traj.outcome == OUTCOME_CONVERGED:
                        counted += 1
                        matches += int(row["match"])
                        rlds.append(row["rld"])
            except Exception as exc:  # recorded, batch continues
                errors += 1
                row["error"] = f"{type(exc).__name__}: {exc}"
            runs.append(row)
        agg = {"world": w_idx, "errors": errors}
        if oracle and counted:
            agg["match_rate"] = matches / counted
            agg["mean_rld"] = float(np.mean(rlds))
            agg["max_rld"] = float(np.max(rlds))
            agg["converged"] = counted
        per_world.append(agg)
    aggregates = {"per_world": per_world, "seed": config.seed}
    if oracle:
        rates = [a["match_rate"] for a in per_world if "match_rate" in a]
        if rates:
            aggregates["overall_match_rate"] = float(np.mean(rates))
    return ExperimentReport(runs=runs, aggregates=aggregates)


# --- artifact export (atomic writes) ---

def _atomic_write(path: str, payload: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_to_json(report: ExperimentReport, path: str) -> None:
    _atomic_write(path, json.dumps(report.to_dict(), sort_keys=True, indent=1))


def trajectory_to_csv(traj: Trajectory, path: str, world=None, config=None, x_d=None) -> None:
    n = traj.x.shape[1]
    rows = []
    header = (
        ["t"]
        + [f"x{i + 1}" for i in range(n)]
        + [f"u{i + 1}" for i in range(n)]
        + ["mode", "active_ids", "clearance"]
    )
    if traj.psi is not None:
        header += ["psi", "v", "omega"]
    if traj.u is None and world is not None and config is not None and x_d is not None:
        us, modes, active = [], [], []
        for q in traj.x:
            try:
                out = control(q, x_d, world, config.params)
            except ValueError:
                # recorded state grazing or past a boundary; no command there
                us.append(np.zeros(n))
                modes.append("boundary")
                active.append([])
                continue
            us.append(out.u)
            modes.append(out.mode)
            active.append(list(out.trace.obstacle_sequence))
        traj.u = np.array(us)
        traj.modes = modes
        traj.active_ids = active
    for k in range(len(traj.x)):
        row = [f"{traj.t[k]:.9f}"] + [f"{v:.9f}" for v in traj.x[k]]
        if traj.u is not None and k < len(traj.u):
            row += [f"{v:.9f}" for v in traj.u[k]]
            row.append(traj.modes[k] if traj.modes and k < len(traj.modes) else "")
            ids = traj.active_ids[k] if traj.active_ids and k < len(traj.active_ids) else []
            row.append(";".join(str(i) for i in ids))
        else:
            row += [""] * n + ["", ""]
        row.append(f"{traj.clearance[k]:.9f}")
        if traj.psi is not None:
            if k < len(traj.psi):
                row += [f"{traj.psi[k]:.9f}", f"{traj.v[k]:.9f}", f"{traj.omega[k]:.9f}"]
            else:
                row += ["", "", ""]
        rows.append(row)
    buf = []
    buf.append(",".join(header))
    for row in rows:
        buf.append(",".join(str(c) for c in row))
    _atomic_write(path, "\n".join(buf) + "\n")
