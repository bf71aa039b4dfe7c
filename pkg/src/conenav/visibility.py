"""Free-space subset predicates: hats, shadows, exit sets, blocking sets.

All predicates are pure functions over an immutable world. Cone boundary
points count as inside for the "<=" predicates (closed sets).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import Cone, cone_contains, segment_disc_intersects
from .world import DiscObstacle, World


@dataclass(frozen=True)
class ShadowQuery:
    """A destination point, an obstacle id, and an optional sensing radius."""

    x_d: np.ndarray
    obstacle_id: int
    R: Optional[float] = None


def _disc_cone(vertex, obstacle: DiscObstacle) -> Cone:
    vertex = np.asarray(vertex, dtype=float)
    axis = obstacle.center - vertex
    d = float(np.linalg.norm(axis))
    if d <= obstacle.radius:
        raise ValueError("cone vertex lies inside the obstacle")
    return Cone(vertex=vertex, axis=axis, half_aperture=math.asin(obstacle.radius / d))


def hat_contains(q, x, obstacle: DiscObstacle, strict: bool = False) -> bool:
    """True iff q is in the hat of the cone with vertex x over the obstacle.

    The hat is the cone restricted to the far side of the vertex relative
    to the obstacle center. ``strict`` tests the interior instead of the
    closed set.
    """
    q = np.asarray(q, dtype=float)
    x = np.asarray(x, dtype=float)
    cone = _disc_cone(x, obstacle)
    if not cone_contains(q, cone, sense="<" if strict else "<="):
        return False
    if np.array_equal(q, x):
        return False  # the vertex is on the near side
    s = float((obstacle.center - q) @ (x - q))
    return s < 0.0 if strict else s <= 0.0


def _disc_shadow_contains(q, x_d, obstacle: DiscObstacle, sense: str) -> bool:
    q = np.asarray(q, dtype=float)
    x_d = np.asarray(x_d, dtype=float)
    cone = _disc_cone(x_d, obstacle)
    if not cone_contains(q, cone, sense=sense):
        return False
    return float((obstacle.center - q) @ (x_d - q)) >= 0.0


def shadow_contains(q, query: ShadowQuery, world: World) -> bool:
    """True iff q is hidden from query.x_d by the obstacle."""
    o = world.obstacle(query.obstacle_id)
    if isinstance(o, DiscObstacle):
        return _disc_shadow_contains(q, query.x_d, o, sense="<=")
    # convex obstacle: hidden iff the sight segment meets the obstacle
    return o.segment_intersects(query.x_d, q)


def exit_set_contains(q, query: ShadowQuery, world: World) -> bool:
    """True iff q lies on the shadow boundary cone surface (far side)."""
    o = world.obstacle(query.obstacle_id)
    if not isinstance(o, DiscObstacle):
        raise TypeError("exit sets are defined for disc obstacles")
    return _disc_shadow_contains(q, query.x_d, o, sense="=")


def blocking_obstacles(x, y, world: World) -> list:
    """Ids of obstacles intersected by the segment [x, y], in id order."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ids = []
    for o in sorted(world.obstacles, key=lambda o: o.id):
        if isinstance(o, DiscObstacle):
            hit = segment_disc_intersects(x, y, o.center, o.radius)
        else:
            hit = o.segment_intersects(x, y)
        if hit:
            ids.append(o.id)
    return ids


def is_visible(x, x_d, world: World) -> bool:
    return not blocking_obstacles(x, x_d, world)


def _distance_to_obstacle(x_d, o) -> float:
    return max(o.distance(x_d), 0.0)


def progeny(query: ShadowQuery, world: World) -> list:
    """Obstacles whose shadow overlaps this one's and that sit farther
    from x_d (ties broken toward the lower id being the nearer)."""
    x_d = np.asarray(query.x_d, dtype=float)
    o_i = world.obstacle(query.obstacle_id)
    d_i = _distance_to_obstacle(x_d, o_i)
    out = []
    for o_j in world.obstacles:
        if o_j.id == o_i.id:
            continue
        d_j = _distance_to_obstacle(x_d, o_j)
        if d_j < d_i or (d_j == d_i and o_j.id < o_i.id):
            continue
        if _shadows_overlap(x_d, o_i, o_j, world):
            out.append(o_j.id)
    return out


def _shadows_overlap(x_d, o_i, o_j, world: World) -> bool:
    if isinstance(o_i, DiscObstacle) and isinstance(o_j, DiscObstacle):
        a_i = o_i.center - x_d
        a_j = o_j.center - x_d
        di, dj = np.linalg.norm(a_i), np.linalg.norm(a_j)
        if di <= o_i.radius or dj <= o_j.radius:
            return True
        phi_i = math.asin(min(1.0, o_i.radius / di))
        phi_j = math.asin(min(1.0, o_j.radius / dj))
        ang = math.acos(min(1.0, max(-1.0, float(a_i @ a_j) / (di * dj))))
        return ang <= phi_i + phi_j + 1e-12
    # convex: sampled overlap test on the farther obstacle's boundary
    q_i = ShadowQuery(x_d, o_i.id)
    for p in o_j.boundary_points(128):
        if shadow_contains(p, q_i, world):
            return True
    return False


def truncated_shadow_contains(q, query: ShadowQuery, world: World) -> bool:
    """In this obstacle's shadow but in none of its progeny's shadows."""
    if not shadow_contains(q, query, world):
        return False
    for j in progeny(query, world):
        if shadow_contains(q, ShadowQuery(query.x_d, j), world):
            return False
    return True


def practical_shadow_contains(q, query: ShadowQuery, world: World) -> bool:
    """Truncated shadow restricted to within sensing range of the obstacle."""
    if query.R is None or query.R <= 0:
        raise ValueError("practical shadow needs a positive sensing radius R")
    o = world.obstacle(query.obstacle_id)
    q = np.asarray(q, dtype=float)
    if isinstance(o, DiscObstacle):
        if np.linalg.norm(q - o.center) > o.radius + query.R:
            return False
    else:
        if o.distance(q) > query.R:
            return False
    return truncated_shadow_contains(q, query, world)
