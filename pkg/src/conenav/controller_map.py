"""Map-based feedback controller built on cone-parallel projections.

When the destination is visible the command is the nominal attractive
field. Otherwise the command is deflected by successive minimal-angle
projections onto the enclosing cones of the blocking obstacles, producing
a chain of virtual destinations that ends with a clear line of sight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .geometry import angle, norm, proj_parallel, segment_disc_intersects, unit
from .visibility import blocking_obstacles, is_visible
from .world import DiscObstacle, World

BETA_CLAMP_TOL = 1e-9


@dataclass(frozen=True)
class ControlParams:
    gamma: float = 1.0
    e_c: float = 0.01
    max_depth: int = 64

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.e_c <= 0:
            raise ValueError("e_c must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be a positive integer")


@dataclass
class ProjectionTrace:
    obstacle_sequence: List[int] = field(default_factory=list)
    intermediates: List[Tuple[np.ndarray, np.ndarray, float, float]] = field(default_factory=list)
    virtual_destinations: List[np.ndarray] = field(default_factory=list)
    zero_control: bool = False

    @property
    def depth(self) -> int:
        return len(self.obstacle_sequence)


@dataclass
class ControlOutput:
    u: np.ndarray
    mode: str  # "visible" | "projected"
    trace: ProjectionTrace


class DepthExceededError(RuntimeError):
    """The projection chain did not terminate within max_depth steps."""


def cone_angles(u, x, obstacle: DiscObstacle) -> Tuple[float, float]:
    """(beta, theta): angle of u off the center line, and cone half-angle."""
    x = np.asarray(x, dtype=float)
    axis = obstacle.center - x
    d = norm(axis)
    if d <= obstacle.radius:
        raise ValueError("point lies inside the obstacle")
    theta = math.asin(obstacle.radius / d)
    beta = angle(u, axis)
    return beta, theta


def xi(u, x, obstacle: DiscObstacle) -> np.ndarray:
    """Minimal-angle projection of u onto the cone-parallel set of the
    obstacle's enclosing cone at x.

    Requires ``u`` to point inside the cone (beta <= theta up to a small
    tolerance). The returned vector makes exactly the cone half-angle with
    the center line, and its magnitude shrinks by sin(beta)/sin(theta).
    """
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    nu = norm(u)
    if nu == 0.0:
        raise ValueError("u must be nonzero")
    beta, theta = cone_angles(u, x, obstacle)
    if beta > theta + BETA_CLAMP_TOL:
        raise ValueError(f"u is outside the obstacle cone (beta={beta} > theta={theta})")
    beta = min(beta, theta)
    axis_hat = unit(obstacle.center - x)
    return u - nu * (math.sin(theta - beta) / math.sin(theta)) * axis_hat


def nominal(x, x_d, params: ControlParams) -> np.ndarray:
    return params.gamma * (np.asarray(x_d, dtype=float) - np.asarray(x, dtype=float))


def single_obstacle_control(x, x_d, obstacle: DiscObstacle, params: ControlParams) -> ControlOutput:
    """Control law for a world with one obstacle: deflect only when the
    obstacle blocks the line of sight."""
    x = np.asarray(x, dtype=float)
    x_d = np.asarray(x_d, dtype=float)
    u_d = nominal(x, x_d, params)
    if not segment_disc_intersects(x, x_d, obstacle.center, obstacle.radius):
        return ControlOutput(u=u_d, mode="visible", trace=ProjectionTrace())
    u = xi(u_d, x, obstacle)
    beta, theta = cone_angles(u_d, x, obstacle)
    trace = ProjectionTrace(
        obstacle_sequence=[obstacle.id],
        intermediates=[(u, _tangency_point(u, x, obstacle), beta, theta)],
        virtual_destinations=[x + u],
        zero_control=bool(norm(u) == 0.0),
    )
    return ControlOutput(u=u, mode="projected", trace=trace)


def _tangency_point(u_p, x, obstacle: DiscObstacle) -> np.ndarray:
    """Point where the half-line from x along u_p grazes the obstacle."""
    n = norm(u_p)
    if n == 0.0:
        return np.asarray(x, dtype=float).copy()
    return x + proj_parallel(u_p / n, obstacle.center - x)


def _set_distance(a: DiscObstacle, b: DiscObstacle) -> float:
    return max(float(np.linalg.norm(a.center - b.center)) - a.radius - b.radius, 0.0)


def _point_distance(p, o: DiscObstacle) -> float:
    return max(o.distance(p), 0.0)


def control(x, x_d, world: World, params: ControlParams) -> ControlOutput:
    """Full multi-obstacle control law.

    Blocking obstacles are peeled off one projection at a time: the first
    is the blocker closest to the destination; each subsequent one is the
    blocker of the current tangency segment closest to the previous
    obstacle. Ties go to the lower obstacle id.
    """
    x = np.asarray(x, dtype=float)
    x_d = np.asarray(x_d, dtype=float)
    u_d = nominal(x, x_d, params)
    blockers = blocking_obstacles(x, x_d, world)
    if not blockers:
        return ControlOutput(u=u_d, mode="visible", trace=ProjectionTrace())

    current = min(
        (world.obstacle(k) for k in blockers),
        key=lambda o: (_point_distance(x_d, o), o.id),
    )
    trace = ProjectionTrace()
    u = u_d
    used = set()
    while True:
        if trace.depth >= params.max_depth:
            raise DepthExceededError(
                f"projection chain exceeded max_depth={params.max_depth}; "
                f"sequence so far: {trace.obstacle_sequence}"
            )
        beta, theta = cone_angles(u, x, current)
        u = xi(u, x, current)
        used.add(current.id)
        c_hat = _tangency_point(u, x, current)
        trace.obstacle_sequence.append(current.id)
        trace.intermediates.append((u, c_hat, beta, theta))
        trace.virtual_destinations.append(x + u)
        if norm(u) == 0.0:
            trace.zero_control = True
            return ControlOutput(u=u, mode="projected", trace=trace)
        remaining = [k for k in blocking_obstacles(x, c_hat, world) if k not in used]
        if not remaining:
            return ControlOutput(u=u, mode="projected", trace=trace)
        prev = current
        current = min(
            (world.obstacle(k) for k in remaining),
            key=lambda o: (_set_distance(prev, o), o.id),
        )


def virtual_destination(x, x_d, world: World, params: ControlParams) -> List[np.ndarray]:
    """The chain of intermediate steering targets P_p = x + u_p; the last
    one has a clear line of sight and is the quasi-optimal target."""
    x_d = np.asarray(x_d, dtype=float)
    if is_visible(x, x_d, world):
        return [x_d]
    return control(x, x_d, world, params).trace.virtual_destinations
