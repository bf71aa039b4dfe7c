"""Hot-loop kernels with a compiled fast path.

Three operations dominate the runtime of batch experiments: range-scan
ray casting, single control evaluations, and whole-trajectory integration
in disc worlds. Each has a compiled implementation in ``conenav._speed``
(Cython) and a numpy fallback here; the compiled one is used when the
extension built and ``CONENAV_PURE`` is unset.

Status codes returned by ``simulate_disc_world``:
0 converged, 1 stalled, 2 time limit, 3 safety violation.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:  # pragma: no cover - environment-dependent
    from . import _speed  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover
    _speed = None

_USE_COMPILED = _speed is not None and not os.environ.get("CONENAV_PURE")


def backend() -> str:
    return "compiled" if _USE_COMPILED else "python"


# --- pure-python/numpy implementations ---

def _scan_py(x, centers, radii, r0, thetas, R):
    x = np.asarray(x, dtype=float)
    dirs = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    # workspace circle (from inside): t = -x.d + sqrt((x.d)^2 - (|x|^2 - r0^2))
    b = dirs @ x
    disc = b * b - (float(x @ x) - r0 * r0)
    rhos = np.where(disc >= 0, -b + np.sqrt(np.maximum(disc, 0.0)), np.inf)
    rhos = np.minimum(rhos, R)
    for c, r in zip(centers, radii):
        oc = x - c
        bb = dirs @ oc
        cc = float(oc @ oc) - r * r
        d2 = bb * bb - cc
        ok = d2 >= 0
        s = np.sqrt(np.maximum(d2, 0.0))
        t = -bb - s
        t2 = -bb + s
        t = np.where(t < 0, t2, t)
        t = np.where(ok & (t >= 0), t, np.inf)
        rhos = np.minimum(rhos, t)
    return np.minimum(rhos, R)


def _seg_point_dist(a, b, p):
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.linalg.norm(p - (a + t * ab)))


def _blockers(x, y, centers, radii, exclude):
    out = []
    for k in range(len(radii)):
        if k in exclude:
            continue
        if _seg_point_dist(x, y, centers[k]) <= radii[k]:
            out.append(k)
    return out


def _control_py(x, x_d, centers, radii, gamma, max_depth):
    x = np.asarray(x, dtype=float)
    x_d = np.asarray(x_d, dtype=float)
    u = gamma * (x_d - x)
    blockers = _blockers(x, x_d, centers, radii, set())
    if not blockers:
        return u, 0
    k = min(
        blockers,
        key=lambda j: (max(float(np.linalg.norm(x_d - centers[j])) - radii[j], 0.0), j),
    )
    used = set()
    depth = 0
    while True:
        if depth >= max_depth:
            raise RuntimeError(f"projection chain exceeded max_depth={max_depth}")
        axis = centers[k] - x
        d = float(np.linalg.norm(axis))
        theta = math.asin(min(1.0, radii[k] / d))
        nu = float(np.linalg.norm(u))
        cb = float(u @ axis) / (nu * d)
        beta = math.acos(min(1.0, max(-1.0, cb)))
        if beta > theta:
            beta = theta
        u = u - nu * (math.sin(theta - beta) / math.sin(theta)) * axis / d
        used.add(k)
        depth += 1
        nu = float(np.linalg.norm(u))
        if nu == 0.0:
            return u, 1
        c_hat = x + (float(axis @ u) / (nu * nu)) * u
        remaining = _blockers(x, c_hat, centers, radii, used)
        if not remaining:
            return u, 1
        prev = k
        k = min(
            remaining,
            key=lambda j: (
                max(
                    float(np.linalg.norm(centers[prev] - centers[j]))
                    - radii[prev]
                    - radii[j],
                    0.0,
                ),
                j,
            ),
        )


def _simulate_py(
    x0, x_d, centers, radii, r0, gamma, h, max_steps, e_c, tol_eq, stall_limit, max_depth
):
    x = np.asarray(x0, dtype=float).copy()
    x_d = np.asarray(x_d, dtype=float)
    traj = [x.copy()]
    stall = 0
    safety_tol = -1e-6 * r0
    for _ in range(max_steps):
        if float(np.linalg.norm(x - x_d)) <= e_c:
            return np.array(traj), 0
        k1, _ = _control_py(x, x_d, centers, radii, gamma, max_depth)
        if float(np.linalg.norm(k1)) <= tol_eq:
            stall += 1
            if stall >= stall_limit:
                return np.array(traj), 1
        else:
            stall = 0
        k2, _ = _control_py(x + 0.5 * h * k1, x_d, centers, radii, gamma, max_depth)
        k3, _ = _control_py(x + 0.5 * h * k2, x_d, centers, radii, gamma, max_depth)
        k4, _ = _control_py(x + h * k3, x_d, centers, radii, gamma, max_depth)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        traj.append(x.copy())
        clearance = r0 - float(np.linalg.norm(x))
        for c, r in zip(centers, radii):
            clearance = min(clearance, float(np.linalg.norm(x - c)) - r)
        if clearance < safety_tol:
            return np.array(traj), 3
    return np.array(traj), 2


# --- public dispatch ---

def scan_disc_world(x, centers, radii, r0, thetas, R):
    centers = np.ascontiguousarray(centers, dtype=float)
    radii = np.ascontiguousarray(radii, dtype=float)
    thetas = np.ascontiguousarray(thetas, dtype=float)
    if _USE_COMPILED:
        return _speed.scan_disc_world(
            np.ascontiguousarray(x, dtype=float), centers, radii, float(r0), thetas, float(R)
        )
    return _scan_py(x, centers, radii, r0, thetas, R)


def control_disc_world(x, x_d, centers, radii, gamma=1.0, max_depth=64):
    centers = np.ascontiguousarray(centers, dtype=float)
    radii = np.ascontiguousarray(radii, dtype=float)
    if _USE_COMPILED:
        u = np.empty(len(np.atleast_1d(x)), dtype=float)
        mode = _speed.control_disc_world(
            np.ascontiguousarray(x, dtype=float),
            np.ascontiguousarray(x_d, dtype=float),
            centers,
            radii,
            float(gamma),
            int(max_depth),
            u,
        )
        if mode < 0:
            raise RuntimeError(f"projection chain exceeded max_depth={max_depth}")
        return u, mode
    return _control_py(x, x_d, centers, radii, gamma, max_depth)


def simulate_disc_world(
    x0,
    x_d,
    centers,
    radii,
    r0,
    gamma=1.0,
    h=0.01,
    max_steps=100_000,
    e_c=0.01,
    tol_eq=1e-7,
    stall_limit=100,
    max_depth=64,
):
    centers = np.ascontiguousarray(centers, dtype=float)
    radii = np.ascontiguousarray(radii, dtype=float)
    if _USE_COMPILED:
        traj, status = _speed.simulate_disc_world(
            np.ascontiguousarray(x0, dtype=float),
            np.ascontiguousarray(x_d, dtype=float),
            centers,
            radii,
            float(r0),
            float(gamma),
            float(h),
            int(max_steps),
            float(e_c),
            float(tol_eq),
            int(stall_limit),
            int(max_depth),
        )
        if status < 0:
            raise RuntimeError(f"projection chain exceeded max_depth={max_depth}")
        return traj, status
    return _simulate_py(
        x0, x_d, centers, radii, r0, gamma, h, max_steps, e_c, tol_eq, stall_limit, max_depth
    )
