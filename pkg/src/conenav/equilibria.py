"""Undesired-equilibrium analysis.

The projected control vanishes on measure-zero line segments behind
obstacles. This module locates those segments by certified sampling of
the analytic candidate lines, decides which obstacles are provably free
of them (hat-union exemption conditions), and checks the global
no-chained-equilibria assumption with explicit witnesses.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .controller_map import ControlParams, DepthExceededError, control
from .visibility import ShadowQuery, hat_contains, truncated_shadow_contains
from .world import ConvexObstacle, DiscObstacle, World

SAMPLE_STEP_FACTOR = 1e-3  # sampling step along candidate lines, x r0
TOL_EQ_FACTOR = 1e-8  # zero-control tolerance, x gamma x r0
HAT_BOUNDARY_SAMPLES = 720


@dataclass
class EquilibriumLine:
    obstacle_id: int
    segments: List[Tuple[np.ndarray, np.ndarray]] = field(default_factory=list)


@dataclass
class CrossedSet:
    obstacle_id: int
    crossed: List[int]  # ordered by proximity to the generating obstacle
    exempt: List[int]
    order: int


def _central_direction(obstacle, x_d) -> Optional[np.ndarray]:
    if isinstance(obstacle, DiscObstacle):
        anchor = obstacle.center
    else:
        anchor = _farthest_boundary_point(obstacle, x_d)
    d = anchor - np.asarray(x_d, dtype=float)
    n = np.linalg.norm(d)
    if n == 0.0:
        return None
    return d / n


def _farthest_boundary_point(obstacle: ConvexObstacle, x_d) -> np.ndarray:
    pts = obstacle.boundary_points(2048)
    return pts[int(np.argmax(np.linalg.norm(pts - np.asarray(x_d, dtype=float), axis=1)))]


def _candidate_rays(world: World, obstacle: DiscObstacle, x_d):
    """(origin, direction) pairs whose union covers the zero-control locus
    of the obstacle: the ray opposite the destination, plus every line
    through the center tangent to another obstacle (ancestor chains)."""
    rays = []
    u = _central_direction(obstacle, x_d)
    if u is not None:
        rays.append((obstacle.center, u))
    for other in world.obstacles:
        if other.id == obstacle.id:
            continue
        v = other.center - obstacle.center
        d = float(np.linalg.norm(v))
        if d <= other.radius:
            continue
        phi = math.asin(other.radius / d)
        v = v / d
        c, s = math.cos(phi), math.sin(phi)
        for rot in (
            np.array([[c, -s], [s, c]]),
            np.array([[c, s], [-s, c]]),
        ):
            t = rot @ v
            rays.append((obstacle.center, t))
            rays.append((obstacle.center, -t))
    return rays


def _collect_segments(world, obstacle_id, x_d, params, rays, step, tol):
    segments = []
    r0 = world.r0
    for origin, direction in rays:
        max_len = 2.0 * r0
        ns = int(max_len / step)
        run_start = None
        prev_q = None
        for k in range(ns + 1):
            q = origin + k * step * direction
            ok = False
            if world.in_free_space(q) and np.linalg.norm(q) <= r0:
                try:
                    out = control(q, x_d, world, params)
                    ok = (
                        float(np.linalg.norm(out.u)) <= tol
                        and out.mode == "projected"
                        and out.trace.obstacle_sequence[-1] == obstacle_id
                    )
                except (DepthExceededError, ValueError):
                    ok = False
            if ok and run_start is None:
                run_start = q
            elif not ok and run_start is not None:
                segments.append((run_start, prev_q))
                run_start = None
            prev_q = q
        if run_start is not None:
            segments.append((run_start, prev_q))
    return segments


def undesired_segments_map(
    world: World, x_d, params: Optional[ControlParams] = None
) -> List[EquilibriumLine]:
    """Zero-control segments of the map controller, one entry per obstacle
    (possibly with no segments)."""
    if params is None:
        params = ControlParams()
    x_d = np.asarray(x_d, dtype=float)
    step = SAMPLE_STEP_FACTOR * world.r0
    tol = TOL_EQ_FACTOR * params.gamma * world.r0
    out = []
    for o in world.obstacles:
        rays = _candidate_rays(world, o, x_d)
        segs = _collect_segments(world, o.id, x_d, params, rays, step, tol)
        out.append(EquilibriumLine(obstacle_id=o.id, segments=segs))
    return out


def _ray_disc_far_intersection(origin, direction, obstacle: DiscObstacle):
    """Farthest intersection of the ray with the obstacle boundary, or None."""
    oc = origin - obstacle.center
    b = float(direction @ oc)
    c = float(oc @ oc) - obstacle.radius**2
    disc = b * b - c
    if disc < 0:
        return None
    t = -b + math.sqrt(disc)
    if t < 0:
        return None
    return origin + t * direction


def _hat_union_contains(q, vertex, anchors, world, strict=True) -> bool:
    for j in anchors:
        if hat_contains(q, vertex, world.obstacle(j), strict=strict):
            return True
    return False


def _hat_union_meets_obstacle(vertex, anchors, target, world) -> bool:
    pts = np.vstack([target.boundary_points(HAT_BOUNDARY_SAMPLES), target.center])
    return any(_hat_union_contains(p, vertex, anchors, world) for p in pts)


def lemma5_exemptions(world: World, x_d) -> List[CrossedSet]:
    """Per obstacle: which of the obstacles crossed by its central
    half-line provably generate no equilibria.

    Walking the crossed obstacles from nearest to farthest, obstacle k is
    exempt when (1) its center lies inside the union of the hats, with
    vertex at the far crossing point of k, enclosing the generator and the
    already-exempt obstacles, and (2) that hat union meets no other
    obstacle. The walk stops at the first failure.
    """
    x_d = np.asarray(x_d, dtype=float)
    out = []
    for o in world.obstacles:
        if not isinstance(o, DiscObstacle):
            raise TypeError("exemption analysis is defined for disc worlds")
        u = _central_direction(o, x_d)
        if u is None:
            out.append(CrossedSet(o.id, [], [], 0))
            continue
        crossed = []
        for other in world.obstacles:
            if other.id == o.id:
                continue
            far = _ray_disc_far_intersection(o.center, u, other)
            if far is not None:
                crossed.append(other)
        crossed.sort(
            key=lambda k: (
                float(np.linalg.norm(k.center - o.center)) - k.radius - o.radius,
                k.id,
            )
        )
        exempt: List[int] = []
        order = 0
        for p, k in enumerate(crossed, start=1):
            vertex = _ray_disc_far_intersection(o.center, u, k)
            anchors = [o.id] + exempt
            cond1 = _hat_union_contains(k.center, vertex, anchors, world)
            cond2 = True
            considered = set(anchors) | {k.id}
            for other in world.obstacles:
                if other.id in considered:
                    continue
                if _hat_union_meets_obstacle(vertex, anchors, other, world):
                    cond2 = False
                    break
            if cond1 and cond2:
                exempt.append(k.id)
                order = p
            else:
                break
        out.append(
            CrossedSet(
                obstacle_id=o.id,
                crossed=[k.id for k in crossed],
                exempt=exempt,
                order=order,
            )
        )
    return out


def assumption3_check(world: World, x_d):
    """(ok, witnesses): every obstacle crossed by a central half-line must
    be exempt; witnesses list the violating (generator, crossed) pairs."""
    witnesses = []
    for cs in lemma5_exemptions(world, x_d):
        for k in cs.crossed:
            if k not in cs.exempt:
                witnesses.append((cs.obstacle_id, k))
    return (not witnesses, witnesses)


def undesired_segments_sensor(world: World, x_d, R: float) -> List[EquilibriumLine]:
    """Zero-control segments of the sensor controller: the piece of each
    obstacle's antipodal ray inside its practical shadow region."""
    x_d = np.asarray(x_d, dtype=float)
    step = SAMPLE_STEP_FACTOR * world.r0
    out = []
    for o in world.obstacles:
        u = _central_direction(o, x_d)
        line = EquilibriumLine(obstacle_id=o.id)
        if u is None:
            out.append(line)
            continue
        if isinstance(o, DiscObstacle):
            anchor = o.center + o.radius * u
        else:
            anchor = _farthest_boundary_point(o, x_d)
        query = ShadowQuery(x_d, o.id, R=R)
        run_start = None
        prev_q = None
        ns = int(2.0 * world.r0 / step)
        for k in range(ns + 1):
            q = anchor + k * step * u
            if isinstance(o, DiscObstacle):
                in_range = np.linalg.norm(q - o.center) <= o.radius + R
            else:
                in_range = o.distance(q) <= R
            ok = (
                in_range
                and world.in_free_space(q)
                and truncated_shadow_contains(q, query, world)
            )
            if ok and run_start is None:
                run_start = q
            elif not ok and run_start is not None:
                line.segments.append((run_start, prev_q))
                run_start = None
            prev_q = q
        if run_start is not None:
            line.segments.append((run_start, prev_q))
        out.append(line)
    return out


def report(world: World, x_d, params: Optional[ControlParams] = None) -> str:
    """JSON equilibrium report: segments, exemptions, global verdict."""
    lines = undesired_segments_map(world, x_d, params)
    exemptions = {cs.obstacle_id: cs for cs in lemma5_exemptions(world, x_d)}
    ok, witnesses = assumption3_check(world, x_d)
    doc = []
    for line in lines:
        exempt_anywhere = any(
            line.obstacle_id in cs.exempt for cs in exemptions.values()
        )
        doc.append(
            {
                "obstacle_id": line.obstacle_id,
                "segments": [
                    [[float(v) for v in a], [float(v) for v in b]]
                    for a, b in line.segments
                ],
                "exempt": exempt_anywhere,
                "assumption3": ok,
            }
        )
    return json.dumps(
        {"obstacles": doc, "assumption3": ok, "witnesses": [list(w) for w in witnesses]},
        sort_keys=True,
        indent=1,
    )
