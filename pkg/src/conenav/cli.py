"""Command-line front end.

Subcommands: validate, run, batch, analyze, plot. Exit codes: 0 success,
1 validation failure, 2 runtime error, 3 usage error. All randomness is
seeded through --seed so repeated invocations produce identical reports.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .controller_map import ControlParams
from .controller_sensor import LidarSpec
from .equilibria import report as equilibria_report
from .simulator import (
    SimConfig,
    batch,
    integrate,
    report_to_json,
    trajectory_to_csv,
)
from .world import random_world, validate, world_from_dict

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_USAGE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_world(path):
    with open(path) as fh:
        return world_from_dict(json.load(fh))


def _sim_config(args, params) -> SimConfig:
    return SimConfig(
        controller=args.controller,
        params=params,
        lidar=LidarSpec(resolution_deg=args.lidar_res, R=args.lidar_range),
        h=args.step,
        t_max=args.tmax,
        perturb_on_stall=args.perturb,
        seed=args.seed,
    )


def _add_run_flags(p):
    p.add_argument("--controller", default="map", choices=["map", "sensor", "unicycle_sensor"])
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--ec", type=float, default=0.01)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lidar-res", type=float, default=0.5, help="degrees")
    p.add_argument("--lidar-range", type=float, default=3.4)
    p.add_argument("--perturb", action="store_true")


def cmd_validate(args) -> int:
    world, _ = _load_world(args.world)
    rep = validate(world)
    for v in rep.violations:
        print(
            json.dumps(
                {"kind": v.kind, "obstacle_ids": list(v.obstacle_ids), "magnitude": v.magnitude}
            ),
            file=sys.stderr,
        )
    print(json.dumps({"ok": rep.ok, "violations": len(rep.violations)}))
    return EXIT_OK if rep.ok else EXIT_VALIDATION


def cmd_run(args) -> int:
    world, x_d = _load_world(args.world)
    if x_d is None:
        print("world file has no destination", file=sys.stderr)
        return EXIT_USAGE
    x0 = np.array([float(v) for v in args.x0.split(",")])
    params = ControlParams(gamma=args.gamma, e_c=args.ec, max_depth=max(64, len(world.obstacles) + 1))
    config = _sim_config(args, params)
    traj = integrate(world, x0, x_d, config)
    trajectory_to_csv(traj, args.out, world=world, config=config, x_d=x_d)
    summary = {
        "outcome": traj.outcome,
        "path_length": traj.path_length,
        "min_clearance": traj.min_clearance,
        "steps": int(len(traj.x) - 1),
        "perturbed": traj.perturbed,
    }
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_batch(args) -> int:
    items = []
    if args.random:
        for k in range(args.random):
            world = random_world(seed=args.seed + k, m=args.obstacles, r0=args.r0)
            items.append((world, np.zeros(2)))
    else:
        for path in args.worlds:
            world, x_d = _load_world(path)
            if x_d is None:
                print(f"{path}: world file has no destination", file=sys.stderr)
                return EXIT_USAGE
            items.append((world, x_d))
    params = ControlParams(gamma=args.gamma, e_c=args.ec, max_depth=64)
    config = _sim_config(args, params)
    rep = batch(items, config, starts_per_world=args.starts, oracle=args.oracle)
    report_to_json(rep, args.out)
    for agg in rep.aggregates["per_world"]:
        print(json.dumps(agg, sort_keys=True))
    return EXIT_OK


def cmd_analyze(args) -> int:
    world, x_d = _load_world(args.world)
    if x_d is None:
        print("world file has no destination", file=sys.stderr)
        return EXIT_USAGE
    doc = equilibria_report(world, x_d)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(doc)
    print(doc)
    return EXIT_OK


def cmd_plot(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    world, x_d = _load_world(args.world)
    fig, ax = plt.subplots(figsize=(args.size / 100, args.size / 100))
    layers = set(args.layers.split(","))
    if "world" in layers:
        ax.add_patch(plt.Circle((0, 0), world.r0, fill=False, color="black"))
        for o in world.obstacles:
            pts = o.boundary_points(256)
            ax.fill(pts[:, 0], pts[:, 1], color="0.7", edgecolor="black")
        if x_d is not None:
            ax.plot(*x_d[:2], "r*", markersize=12)
    if "trajectories" in layers and args.trajectory:
        data = np.genfromtxt(args.trajectory, delimiter=",", names=True)
        ax.plot(data["x1"], data["x2"], "b-", linewidth=1)
    ax.set_aspect("equal")
    ax.set_xlim(-1.05 * world.r0, 1.05 * world.r0)
    ax.set_ylim(-1.05 * world.r0, 1.05 * world.r0)
    fig.savefig(args.out, format="svg", bbox_inches="tight")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _Parser(prog="conenav")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check world separation assumptions")
    p.add_argument("world")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="simulate one trajectory")
    p.add_argument("world")
    p.add_argument("--x0", required=True, help="comma-separated start position")
    p.add_argument("--out", default="trajectory.csv")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("batch", help="batch experiments with optional oracle")
    p.add_argument("worlds", nargs="*", help="world JSON files")
    p.add_argument("--random", type=int, default=0, help="generate N random worlds")
    p.add_argument("--obstacles", type=int, default=8)
    p.add_argument("--r0", type=float, default=10.0)
    p.add_argument("--starts", type=int, default=100)
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--out", default="report.json")
    _add_run_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("analyze", help="equilibrium report for a world")
    p.add_argument("world")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("plot", help="render a world/trajectory SVG")
    p.add_argument("world")
    p.add_argument("--trajectory", default=None)
    p.add_argument("--layers", default="world,trajectories")
    p.add_argument("--size", type=int, default=800)
    p.add_argument("--out", default="plot.svg")
    p.set_defaults(func=cmd_plot)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
