"""Compare the compiled kernels against the pure-numpy fallback.

Run as: python benchmarks/bench_kernels.py
"""

import os
import time

import numpy as np

from conenav import _kernels
from conenav.world import random_world


def _time(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    world = random_world(seed=11, m=8, r0=10.0, keep_clear=[((0.0, 0.0), 1.0)])
    centers, radii = world.disc_arrays()
    x = np.array([-8.0, 2.0])
    x_d = np.zeros(2)
    thetas = np.deg2rad(np.arange(720) * 0.5)

    rows = []

    def scan_compiled():
        for _ in range(200):
            _kernels.scan_disc_world(x, centers, radii, world.r0, thetas, 4.0)

    def scan_pure():
        for _ in range(200):
            _kernels._scan_py(x, centers, radii, world.r0, thetas, 4.0)

    rows.append(("scan (200 sweeps, 720 beams)", _time(scan_compiled), _time(scan_pure)))

    pts = np.random.default_rng(0).uniform(-9, 9, size=(5000, 2))

    def ctrl_compiled():
        for p in pts:
            _kernels.control_disc_world(p, x_d, centers, radii, 1.0, 64)

    def ctrl_pure():
        for p in pts:
            _kernels._control_py(p, x_d, centers, radii, 1.0, 64)

    rows.append(("control (5000 evaluations)", _time(ctrl_compiled, repeat=3), _time(ctrl_pure, repeat=3)))

    h = 0.01

    def sim_compiled():
        _kernels.simulate_disc_world(x, x_d, centers, radii, world.r0, 1.0, h, 50_000, 0.01, 1e-7, 100, 64)

    def sim_pure():
        _kernels._simulate_py(x, x_d, centers, radii, world.r0, 1.0, h, 50_000, 0.01, 1e-7, 100, 64)

    rows.append(("closed-loop run (RK4, h=0.01)", _time(sim_compiled, repeat=3), _time(sim_pure, repeat=3)))

    print(f"backend: {_kernels.backend()}  (CONENAV_PURE={os.environ.get('CONENAV_PURE', '')!r})")
    print(f"{'kernel':<34} {'compiled':>10} {'pure':>10} {'speedup':>8}")
    for name, tc, tp in rows:
        print(f"{name:<34} {tc * 1e3:>8.1f}ms {tp * 1e3:>8.1f}ms {tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()
