"""Sensor-based reactive controller.

Works from a 360-degree range scan instead of a map: detected returns are
grouped into arcs, arcs are extended into the free region, and the arc
crossed by the line of sight to the destination induces a virtual cone
that deflects the nominal command exactly like a disc obstacle would.
Includes the unicycle (differential-drive) velocity transform.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import _kernels
from .controller_map import ControlParams
from .geometry import angle, norm, wrap_angle
from .world import ConvexPolygon, Ellipse, PolylineObstacle, RoundedPolygon, World

FREE_TOL = 1e-9  # a return counts as free when rho >= R - FREE_TOL
THETA_FLOOR = 1e-3  # radians; degenerate single-sample arcs


@dataclass(frozen=True)
class LidarSpec:
    resolution_deg: float = 0.5
    R: float = 3.4
    noise_sigma_range: float = 0.0
    min_range: float = 0.0

    def __post_init__(self):
        if not (0 < self.resolution_deg <= 360):
            raise ValueError("resolution must be in (0, 360] degrees")
        if abs(360.0 / self.resolution_deg - round(360.0 / self.resolution_deg)) > 1e-9:
            raise ValueError("resolution must divide 360")
        if self.R <= 0:
            raise ValueError("range must be positive")
        if self.min_range < 0:
            raise ValueError("min_range must be nonnegative")

    @property
    def num_samples(self) -> int:
        return int(round(360.0 / self.resolution_deg))


@dataclass
class LidarScan:
    origin: np.ndarray
    thetas: np.ndarray  # radians, ascending from 0
    rhos: np.ndarray
    R: float

    def points(self) -> np.ndarray:
        return self.origin + self.rhos[:, None] * np.stack(
            [np.cos(self.thetas), np.sin(self.thetas)], axis=1
        )


@dataclass
class ArcList:
    arcs: List[np.ndarray] = field(default_factory=list)
    extended: List[np.ndarray] = field(default_factory=list)


@dataclass
class VirtualCone:
    c_tilde: np.ndarray
    theta_tilde: float
    beta_tilde: float
    active_arc: int


@dataclass(frozen=True)
class UnicycleParams:
    k_v: float = 0.8
    p: int = 3
    v_max: float = 0.26
    omega_max: float = 1.82

    def __post_init__(self):
        if min(self.k_v, self.v_max, self.omega_max) <= 0 or self.p < 1:
            raise ValueError("unicycle parameters must be positive")


@dataclass
class SensorControlOutput:
    u: np.ndarray
    mode: str  # "visible" | "projected"
    cone: Optional[VirtualCone] = None


def scan(x, world: World, spec: LidarSpec, rng=None) -> LidarScan:
    """Cast one ray per scan angle and return clamped ranges."""
    x = np.asarray(x, dtype=float)
    thetas = np.deg2rad(np.arange(spec.num_samples) * spec.resolution_deg)
    if world.kind == "disc":
        centers, radii = world.disc_arrays()
        rhos = _kernels.scan_disc_world(x, centers, radii, world.r0, thetas, spec.R)
    else:
        rhos = _scan_convex(x, thetas, world, spec.R)
    if rng is not None and spec.noise_sigma_range > 0:
        rhos = rhos + rng.normal(0.0, spec.noise_sigma_range, size=rhos.shape)
    rhos = np.clip(rhos, 0.0, spec.R)
    return LidarScan(origin=x, thetas=thetas, rhos=rhos, R=spec.R)


def _convex_scan_primitives(world: World):
    """Closed-form scan primitives (segments, circles, ellipses) for a
    convex world, cached on the world object.

    A rounded polygon is the Minkowski sum of its core with a ball, so the
    first boundary crossing along a ray is the earliest entry into any
    outward-shifted edge segment or corner circle.
    """
    cache = getattr(world, "_scan_primitives", None)
    if cache is not None:
        return cache
    seg_a, seg_b, circ_c, circ_r, ells = [], [], [], [], []
    for o in world.obstacles:
        if isinstance(o, Ellipse):
            ells.append((o.center.copy(), o.semi_axes, o.rotation))
        elif isinstance(o, RoundedPolygon):
            v = o.core.vertices
            e = np.roll(v, -1, axis=0) - v
            nrm = np.stack([e[:, 1], -e[:, 0]], axis=1)
            nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
            seg_a.append(v + o.corner_radius * nrm)
            seg_b.append(np.roll(v, -1, axis=0) + o.corner_radius * nrm)
            circ_c.append(v)
            circ_r.append(np.full(len(v), o.corner_radius))
        elif isinstance(o, ConvexPolygon):
            seg_a.append(o.vertices)
            seg_b.append(np.roll(o.vertices, -1, axis=0))
        elif isinstance(o, PolylineObstacle):
            seg_a.append(o.points)
            seg_b.append(np.roll(o.points, -1, axis=0))
        else:
            p = o.boundary_points(256)
            seg_a.append(p)
            seg_b.append(np.roll(p, -1, axis=0))
    cache = (
        np.vstack(seg_a) if seg_a else np.empty((0, 2)),
        np.vstack(seg_b) if seg_b else np.empty((0, 2)),
        np.vstack(circ_c) if circ_c else np.empty((0, 2)),
        np.concatenate(circ_r) if circ_r else np.empty(0),
        ells,
    )
    world._scan_primitives = cache
    return cache


def _scan_convex(x, thetas, world: World, R: float) -> np.ndarray:
    """Vectorized ray cast against all convex-world primitives."""
    a, b, cc, cr, ells = _convex_scan_primitives(world)
    d = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)  # (N, 2)
    best = np.full(len(thetas), np.inf)
    # workspace circle (origin is inside, take the outgoing root)
    wb = d @ x
    disc = wb * wb - (float(x @ x) - world.r0 * world.r0)
    best = np.minimum(best, -wb + np.sqrt(np.maximum(disc, 0.0)))
    if len(a):
        e = b - a  # (S, 2)
        w = a - x
        det = np.outer(d[:, 1], e[:, 0]) - np.outer(d[:, 0], e[:, 1])  # (N, S)
        num_t = e[:, 0] * w[:, 1] - e[:, 1] * w[:, 0]  # (S,)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = num_t[None, :] / det
            s = (np.outer(d[:, 0], w[:, 1]) - np.outer(d[:, 1], w[:, 0])) / det
        ok = (det != 0.0) & (t >= 0.0) & (s >= 0.0) & (s <= 1.0)
        t = np.where(ok, t, np.inf)
        best = np.minimum(best, t.min(axis=1))
    if len(cc):
        w = x - cc  # (M, 2)
        bq = d @ w.T  # (N, M)
        c0 = (w * w).sum(axis=1) - cr * cr  # (M,)
        disc = bq * bq - c0
        sq = np.sqrt(np.maximum(disc, 0.0))
        t1 = -bq - sq
        t2 = -bq + sq
        t = np.where(t1 >= 0.0, t1, np.where(t2 >= 0.0, t2, np.inf))
        t = np.where(disc >= 0.0, t, np.inf)
        best = np.minimum(best, t.min(axis=1))
    for center, (sa, sb), rot in ells:
        cr_, sr_ = math.cos(rot), math.sin(rot)
        rel = x - center
        p = np.array([cr_ * rel[0] + sr_ * rel[1], -sr_ * rel[0] + cr_ * rel[1]])
        q = np.stack(
            [cr_ * d[:, 0] + sr_ * d[:, 1], -sr_ * d[:, 0] + cr_ * d[:, 1]], axis=1
        )
        A = (q[:, 0] / sa) ** 2 + (q[:, 1] / sb) ** 2
        B = 2.0 * (p[0] * q[:, 0] / sa**2 + p[1] * q[:, 1] / sb**2)
        C = (p[0] / sa) ** 2 + (p[1] / sb) ** 2 - 1.0
        disc = B * B - 4.0 * A * C
        sq = np.sqrt(np.maximum(disc, 0.0))
        t1 = (-B - sq) / (2.0 * A)
        t2 = (-B + sq) / (2.0 * A)
        t = np.where(t1 >= 0.0, t1, np.where(t2 >= 0.0, t2, np.inf))
        t = np.where(disc >= 0.0, t, np.inf)
        best = np.minimum(best, t)
    return np.minimum(best, R)


def _workspace_hit(x, d, r0) -> Optional[float]:
    # |x + t d| = r0, smallest t >= 0
    b = float(x @ d)
    c = float(x @ x) - r0 * r0
    disc = b * b - c
    if disc < 0:
        return None
    t = -b + math.sqrt(disc)
    return t if t >= 0 else None


def extract_arcs(scan_: LidarScan, resolution_deg: Optional[float] = None) -> ArcList:
    """Group returns into maximal runs, splitting where consecutive hit
    points jump by more than four inter-sample chords (distinct bodies)."""
    n = len(scan_.rhos)
    occupied = scan_.rhos < scan_.R - FREE_TOL
    if not occupied.any():
        return ArcList()
    dtheta = 2.0 * math.pi / n
    pts = scan_.points()
    # circular runs of occupied samples
    runs = []
    if occupied.all():
        runs.append(np.arange(n))
    else:
        # rotate so index 0 is free, then find runs linearly
        start = int(np.argmin(occupied))  # first free index
        order = np.roll(np.arange(n), -start)
        occ = occupied[order]
        i = 0
        while i < n:
            if occ[i]:
                j = i
                while j < n and occ[j]:
                    j += 1
                runs.append(order[i:j])
                i = j
            else:
                i += 1
    arcs = []
    for run in runs:
        # split at Cartesian discontinuities within the run
        cut = [0]
        for k in range(1, len(run)):
            a, b = run[k - 1], run[k]
            chord = dtheta * 0.5 * (scan_.rhos[a] + scan_.rhos[b])
            if np.linalg.norm(pts[b] - pts[a]) > 4.0 * chord:
                cut.append(k)
        cut.append(len(run))
        for s, e in zip(cut[:-1], cut[1:]):
            arcs.append(run[s:e])
    return ArcList(arcs=arcs)


def extend_arcs(scan_: LidarScan, arcs: ArcList) -> ArcList:
    """Grow each arc one sample per side into the free region; adjacent
    arcs abut (or share a single free sample between them)."""
    n = len(scan_.rhos)
    occupied = scan_.rhos < scan_.R - FREE_TOL
    extended = []
    for run in arcs.arcs:
        lo = int(run[0])
        hi = int(run[-1])
        prev = (lo - 1) % n
        nxt = (hi + 1) % n
        out = list(run)
        if not occupied[prev] and prev != hi:
            out = [prev] + out
        if not occupied[nxt] and nxt != lo:
            out = out + [nxt]
        extended.append(np.array(out, dtype=int))
    return ArcList(arcs=arcs.arcs, extended=extended)


def _segment_crosses_polyline(a, b, pts) -> bool:
    """True iff segment [a, b] intersects the open polyline through pts."""
    d = b - a
    if len(pts) > 1:
        p = pts[:-1]
        e = pts[1:] - p
        denom = d[0] * e[:, 1] - d[1] * e[:, 0]
        w = p - a
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (w[:, 0] * e[:, 1] - w[:, 1] * e[:, 0]) / denom
            s = (w[:, 0] * d[1] - w[:, 1] * d[0]) / denom
        hit = (
            (denom != 0.0)
            & (t >= -1e-12)
            & (t <= 1 + 1e-12)
            & (s >= -1e-12)
            & (s <= 1 + 1e-12)
        )
        if hit.any():
            return True
    if len(pts) == 1:
        # degenerate single-point arc: treat as crossed if the point is
        # within a hair of the segment
        w = pts[0] - a
        L2 = float(d @ d)
        if L2 == 0.0:
            return bool(np.linalg.norm(w) < 1e-9)
        t = min(1.0, max(0.0, float(w @ d) / L2))
        return bool(np.linalg.norm(pts[0] - (a + t * d)) < 1e-9)
    return False


def _occupied_block(scan_: LidarScan, run: np.ndarray) -> np.ndarray:
    """Grow ``run`` over neighbouring occupied samples of the same body,
    plus one boundary sample on each side.

    Splitting at Cartesian jumps separates bodies at different depths, but
    a single body viewed at grazing incidence also produces large jumps;
    truncating its silhouette there would understate the cone aperture and
    lose the safety margin. Grazing jumps grow gradually (each is
    comparable to its neighbours), whereas a depth discontinuity is an
    isolated spike, so the walk absorbs a sample when its jump stays
    within a factor of the largest jump seen (or of the beam spacing at
    full range) and stops otherwise.
    """
    n = len(scan_.rhos)
    rhos = scan_.rhos
    occupied = rhos < scan_.R - FREE_TOL
    pts = scan_.points()
    dtheta = 2.0 * math.pi / n
    floor = 4.0 * dtheta * scan_.R

    def jump(a, b):
        return float(np.linalg.norm(pts[b % n] - pts[a % n]))

    lo = int(run[0])
    hi = lo + len(run) - 1  # run is circularly contiguous from run[0]
    ref = 0.0
    for k in range(len(run) - 1):
        ref = max(ref, jump(run[k], run[k + 1]))

    def grow(idx, step, other):
        nonlocal ref
        while occupied[(idx + step) % n] and abs(idx + step - other) + 3 <= n:
            j = jump(idx, idx + step)
            chord = dtheta * 0.5 * (rhos[idx % n] + rhos[(idx + step) % n])
            if j > max(4.0 * chord, floor, 3.0 * ref):
                break
            ref = max(ref, j)
            idx += step
        return idx

    lo = grow(lo, -1, hi)
    hi = grow(hi, +1, lo)
    if hi - lo + 3 > n:
        return np.roll(np.arange(n), -lo % n)
    return np.arange(lo - 1, hi + 2) % n


def virtual_cone(
    x, x_d, arcs: ArcList, scan_: LidarScan, dilation: float = 0.0
) -> Optional[VirtualCone]:
    """Virtual obstacle-cone parameters from the arc blocking the line of
    sight, if any.

    ``dilation`` > 0 treats every detected return as a ball of that radius,
    so the cone encloses the dilated body and the closest point moves that
    much nearer; the closed loop then keeps a matching standoff from the
    real boundary (corner smoothing for convex worlds, margin otherwise).
    """
    x = np.asarray(x, dtype=float)
    x_d = np.asarray(x_d, dtype=float)
    u_d = x_d - x
    if norm(u_d) == 0.0:
        return None
    pts_all = scan_.points()
    occupied = scan_.rhos < scan_.R - FREE_TOL
    seen = set()
    for aid, run in enumerate(arcs.arcs):
        # The crossing test runs on the whole beam-contiguous block: at
        # grazing incidence the within-body splitter can shred a silhouette
        # into fragments too short to register an intersection.
        block = _occupied_block(scan_, run)
        key = (int(block[0]), len(block))
        if key in seen:
            continue
        seen.add(key)
        if not _segment_crosses_polyline(x, x_d, pts_all[block]):
            continue
        pts = pts_all[block]
        dists = np.linalg.norm(pts - x, axis=1)
        hits = occupied[block]
        k = int(np.argmin(np.where(hits, dists, np.inf)))
        d_star = dists[k]
        if d_star > 1e-9:
            axis = (pts[k] - x) / d_star
        else:
            # zero-range return (contact or clipped noise): use the beam
            th = float(scan_.thetas[block[k]])
            axis = np.array([math.cos(th), math.sin(th)])
        c_tilde = x + max(d_star - dilation, 1e-9) * axis
        # enclosing half-aperture on the side of the axis where u_d lies;
        # each return contributes its bearing plus the half-angle its
        # dilation ball subtends
        rel = pts - x
        phi = np.arctan2(
            axis[0] * rel[:, 1] - axis[1] * rel[:, 0], rel @ axis
        )
        side = axis[0] * u_d[1] - axis[1] * u_d[0]
        if side < 0:
            phi = -phi
        widen = np.where(
            hits, np.arcsin(np.minimum(1.0, dilation / np.maximum(dists, 1e-12))), 0.0
        )
        theta = float(np.max(phi + widen))
        theta = min(max(theta, THETA_FLOOR), 0.5 * math.pi)
        beta = min(angle(axis, u_d), theta)
        return VirtualCone(c_tilde=c_tilde, theta_tilde=theta, beta_tilde=beta, active_arc=aid)
    return None


def sensor_control(
    x,
    x_d,
    world: World,
    spec: LidarSpec,
    params: ControlParams,
    rng=None,
    scan_: Optional[LidarScan] = None,
    corner_radius: Optional[float] = None,
) -> SensorControlOutput:
    """One control evaluation from a (possibly supplied) scan."""
    x = np.asarray(x, dtype=float)
    x_d = np.asarray(x_d, dtype=float)
    u_d = params.gamma * (x_d - x)
    if norm(u_d) == 0.0:
        return SensorControlOutput(u=np.zeros_like(u_d), mode="visible")
    if scan_ is None:
        scan_ = scan(x, world, spec, rng=rng)
    arcs = extend_arcs(scan_, extract_arcs(scan_))
    dilation = corner_radius if corner_radius is not None else 0.0
    cone = virtual_cone(x, x_d, arcs, scan_, dilation=dilation)
    if cone is None:
        return SensorControlOutput(u=u_d, mode="visible")
    axis = cone.c_tilde - x
    scale = math.sin(cone.theta_tilde - cone.beta_tilde) / math.sin(cone.theta_tilde)
    u = u_d - norm(u_d) * scale * axis / norm(axis)
    return SensorControlOutput(u=u, mode="projected", cone=cone)


def dilate_detected_corners(points: np.ndarray, x, r: float, samples: int = 32) -> np.ndarray:
    """Replace each endpoint of an arc point list with the portion of the
    ball of radius r around it that faces x, widening the detected hull."""
    if r <= 0:
        raise ValueError("dilation radius must be positive")
    x = np.asarray(x, dtype=float)
    points = np.asarray(points, dtype=float)
    t = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    circle = np.stack([np.cos(t), np.sin(t)], axis=1)

    def visible_ball(e):
        ball = e + r * circle
        facing = (ball - e) @ (x - e) >= 0.0
        pts = ball[facing]
        # order by angle around x so the polyline stays simple
        ang = np.arctan2(pts[:, 1] - x[1], pts[:, 0] - x[0])
        return pts[np.argsort(ang)]

    head = visible_ball(points[0])
    tail = visible_ball(points[-1])
    return np.vstack([head, points, tail])


def unicycle_transform(u, psi: float, params: UnicycleParams):
    """(v, omega) tracking the velocity command u with heading psi.

    The turn rate contracts the heading error; forward speed is smoothly
    gated by alignment so the robot rotates in place when pointed away.
    """
    u = np.asarray(u, dtype=float)
    nu = norm(u)
    if nu == 0.0:
        return 0.0, 0.0
    dpsi = wrap_angle(psi - math.atan2(u[1], u[0]))
    v = min(params.v_max, params.k_v * nu * math.cos(0.5 * dpsi) ** (2 * params.p))
    omega = -params.omega_max * math.sin(0.5 * dpsi)
    return v, omega


def scan_to_csv(scan_: LidarScan, arcs: ArcList, path: str) -> None:
    """Debug dump: one row per beam with arc attributions."""
    n = len(scan_.rhos)
    arc_id = np.full(n, -1)
    ext_id = np.full(n, -1)
    for k, run in enumerate(arcs.arcs):
        arc_id[run] = k
    for k, run in enumerate(arcs.extended):
        ext_id[run] = k
    pts = scan_.points()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta_deg", "rho", "hit_x", "hit_y", "arc_id", "extended_arc_id"])
        for i in range(n):
            w.writerow(
                [
                    f"{math.degrees(scan_.thetas[i]):.6f}",
                    f"{scan_.rhos[i]:.9f}",
                    f"{pts[i, 0]:.9f}",
                    f"{pts[i, 1]:.9f}",
                    int(arc_id[i]),
                    int(ext_id[i]),
                ]
            )
