"""World model: workspace, obstacles, validation, dilation, generation.

A world is homogeneous: either all-disc (any dimension n >= 2) or
all-convex (2-D only). Convex obstacles come in four flavours behind one
interface: ellipses, convex polygons, rounded polygons (a polygon after a
Minkowski sum with a ball), and dense polylines (used for ellipse offset
curves).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import ray_hit_disc, ray_hit_ellipse, ray_hit_segment, segment_point_distance

SEPARATION_MARGIN = 1e-6  # strict-inequality margin, scaled by r0
ELLIPSE_OFFSET_SEGMENTS = 720


@dataclass(frozen=True)
class Workspace:
    """Spherical workspace of radius r0 centered at the origin."""

    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("workspace radius must be positive")


@dataclass
class DiscObstacle:
    center: np.ndarray
    radius: float
    id: int = 0

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        if self.radius <= 0:
            raise ValueError("obstacle radius must be positive")

    def distance(self, q) -> float:
        """Signed distance to the ball surface (negative inside)."""
        return float(np.linalg.norm(np.asarray(q, dtype=float) - self.center)) - self.radius

    def contains(self, q) -> bool:
        return self.distance(q) <= 0.0

    def project(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        d = q - self.center
        n = np.linalg.norm(d)
        if n == 0.0:
            d = np.zeros_like(d)
            d[0] = 1.0
            n = 1.0
        return self.center + self.radius * d / n

    def ray_hit(self, origin, direction):
        return ray_hit_disc(origin, direction, self.center, self.radius)

    def boundary_points(self, k: int) -> np.ndarray:
        t = np.linspace(0.0, 2.0 * math.pi, k, endpoint=False)
        return self.center + self.radius * np.stack([np.cos(t), np.sin(t)], axis=1)

    def max_extent(self) -> float:
        return float(np.linalg.norm(self.center)) + self.radius


class ConvexObstacle:
    """Base for 2-D convex obstacles. Subclasses implement the geometry."""

    id: int = 0

    def distance(self, q) -> float:
        raise NotImplementedError

    def contains(self, q) -> bool:
        return self.distance(q) <= 0.0

    def project(self, q) -> np.ndarray:
        raise NotImplementedError

    def ray_hit(self, origin, direction):
        raise NotImplementedError

    def boundary_points(self, k: int) -> np.ndarray:
        raise NotImplementedError

    def max_extent(self) -> float:
        pts = self.boundary_points(256)
        return float(np.max(np.linalg.norm(pts, axis=1)))

    def segment_intersects(self, a, b) -> bool:
        """True iff the segment [a, b] meets the obstacle."""
        raise NotImplementedError


class Ellipse(ConvexObstacle):
    def __init__(self, center, semi_axes, rotation: float = 0.0, id: int = 0):
        self.center = np.asarray(center, dtype=float)
        self.semi_axes = (float(semi_axes[0]), float(semi_axes[1]))
        if min(self.semi_axes) <= 0:
            raise ValueError("ellipse semi-axes must be positive")
        self.rotation = float(rotation)
        self.id = id

    def _to_local(self, q):
        cr, sr = math.cos(self.rotation), math.sin(self.rotation)
        rel = np.asarray(q, dtype=float) - self.center
        return np.array([cr * rel[0] + sr * rel[1], -sr * rel[0] + cr * rel[1]])

    def _from_local(self, p):
        cr, sr = math.cos(self.rotation), math.sin(self.rotation)
        return self.center + np.array([cr * p[0] - sr * p[1], sr * p[0] + cr * p[1]])

    def contains(self, q) -> bool:
        a, b = self.semi_axes
        p = self._to_local(q)
        return (p[0] / a) ** 2 + (p[1] / b) ** 2 <= 1.0

    def boundary_points(self, k: int) -> np.ndarray:
        a, b = self.semi_axes
        t = np.linspace(0.0, 2.0 * math.pi, k, endpoint=False)
        local = np.stack([a * np.cos(t), b * np.sin(t)], axis=1)
        cr, sr = math.cos(self.rotation), math.sin(self.rotation)
        rot = np.array([[cr, -sr], [sr, cr]])
        return self.center + local @ rot.T

    def distance(self, q) -> float:
        # Newton iteration on the boundary parameter; negative inside.
        a, b = self.semi_axes
        p = self._to_local(q)
        t = math.atan2(p[1] * a, p[0] * b)
        for _ in range(60):
            ct, st = math.cos(t), math.sin(t)
            ex, ey = a * ct, b * st
            rx, ry = p[0] - ex, p[1] - ey
            # derivative of |p - e(t)|^2 / 2 w.r.t. t
            g = rx * a * st - ry * b * ct
            h = rx * a * ct + ry * b * st + a * a * st * st + b * b * ct * ct
            if h == 0.0:
                break
            step = g / h
            t += step
            if abs(step) < 1e-14:
                break
        d = math.hypot(p[0] - a * math.cos(t), p[1] - b * math.sin(t))
        inside = (p[0] / a) ** 2 + (p[1] / b) ** 2 <= 1.0
        return -d if inside else d

    def project(self, q) -> np.ndarray:
        a, b = self.semi_axes
        p = self._to_local(q)
        t = math.atan2(p[1] * a, p[0] * b)
        for _ in range(60):
            ct, st = math.cos(t), math.sin(t)
            rx, ry = p[0] - a * ct, p[1] - b * st
            g = rx * a * st - ry * b * ct
            h = rx * a * ct + ry * b * st + a * a * st * st + b * b * ct * ct
            if h == 0.0:
                break
            step = g / h
            t += step
            if abs(step) < 1e-14:
                break
        return self._from_local(np.array([a * math.cos(t), b * math.sin(t)]))

    def ray_hit(self, origin, direction):
        return ray_hit_ellipse(origin, direction, self.center, self.semi_axes, self.rotation)

    def segment_intersects(self, a, b) -> bool:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.contains(a) or self.contains(b):
            return True
        L = np.linalg.norm(b - a)
        if L == 0.0:
            return False
        hit = self.ray_hit(a, (b - a) / L)
        return hit is not None and hit[0] <= L


class ConvexPolygon(ConvexObstacle):
    def __init__(self, vertices, id: int = 0):
        self.vertices = np.asarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[0] < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if _signed_area(self.vertices) < 0:
            self.vertices = self.vertices[::-1].copy()
        if not _is_convex(self.vertices):
            raise ValueError("polygon must be convex")
        self.id = id

    @property
    def center(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def _edges(self):
        v = self.vertices
        return zip(v, np.roll(v, -1, axis=0))

    def contains(self, q) -> bool:
        q = np.asarray(q, dtype=float)
        for a, b in self._edges():
            e = b - a
            if e[0] * (q[1] - a[1]) - e[1] * (q[0] - a[0]) < -1e-12:
                return False
        return True

    def distance(self, q) -> float:
        q = np.asarray(q, dtype=float)
        d = min(segment_point_distance(a, b, q) for a, b in self._edges())
        return -d if self.contains(q) else d

    def project(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        best, best_d = None, math.inf
        for a, b in self._edges():
            e = b - a
            t = float((q - a) @ e) / float(e @ e)
            t = min(1.0, max(0.0, t))
            p = a + t * e
            d = float(np.linalg.norm(q - p))
            if d < best_d:
                best, best_d = p, d
        return best

    def ray_hit(self, origin, direction):
        best = None
        for a, b in self._edges():
            hit = ray_hit_segment(origin, direction, a, b)
            if hit is not None and (best is None or hit[0] < best[0]):
                best = hit
        return best

    def boundary_points(self, k: int) -> np.ndarray:
        pts = []
        per_edge = max(2, k // len(self.vertices))
        for a, b in self._edges():
            t = np.linspace(0.0, 1.0, per_edge, endpoint=False)[:, None]
            pts.append(a + t * (b - a))
        return np.vstack(pts)

    def segment_intersects(self, a, b) -> bool:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.contains(a) or self.contains(b):
            return True
        L = np.linalg.norm(b - a)
        if L == 0.0:
            return False
        hit = self.ray_hit(a, (b - a) / L)
        return hit is not None and hit[0] <= L


class RoundedPolygon(ConvexObstacle):
    """Minkowski sum of a convex polygon with a ball of radius r."""

    def __init__(self, vertices, corner_radius: float, id: int = 0):
        self.core = ConvexPolygon(vertices)
        if corner_radius <= 0:
            raise ValueError("corner radius must be positive")
        self.corner_radius = float(corner_radius)
        self.id = id

    @property
    def center(self) -> np.ndarray:
        return self.core.center

    def distance(self, q) -> float:
        return self.core.distance(q) - self.corner_radius

    def project(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        p = self.core.project(q)
        d = q - p
        n = np.linalg.norm(d)
        if n == 0.0:
            return p
        sign = -1.0 if self.core.contains(q) else 1.0
        return p + sign * self.corner_radius * d / n

    def perimeter(self) -> float:
        v = self.core.vertices
        edges = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum()
        return float(edges) + 2.0 * math.pi * self.corner_radius

    def boundary_points(self, k: int) -> np.ndarray:
        # Offset of dense core boundary points along outward normals.
        pts = self.core.boundary_points(k)
        out = np.empty_like(pts)
        for i, p in enumerate(pts):
            proj = self.core.project(p + 1e-9)  # p is on the boundary already
            n = p - self.core.center
            # outward normal via projection from a slightly outward point
            q = p + 1e-6 * n / max(np.linalg.norm(n), 1e-12)
            d = q - self.core.project(q)
            nd = np.linalg.norm(d)
            out[i] = p + self.corner_radius * (d / nd if nd > 0 else 0.0)
            del proj
        return out

    def ray_hit(self, origin, direction):
        # Minkowski sum boundary: earliest entry into an outward-shifted
        # edge or a corner circle is exact (no polyline corner cutting).
        origin = np.asarray(origin, dtype=float)
        direction = np.asarray(direction, dtype=float)
        v = self.core.vertices
        e = np.roll(v, -1, axis=0) - v
        nrm = np.stack([e[:, 1], -e[:, 0]], axis=1)
        nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
        best = None
        for a, b in zip(v + self.corner_radius * nrm, np.roll(v, -1, axis=0) + self.corner_radius * nrm):
            hit = ray_hit_segment(origin, direction, a, b)
            if hit is not None and (best is None or hit[0] < best[0]):
                best = hit
        for c in v:
            hit = ray_hit_disc(origin, direction, c, self.corner_radius)
            if hit is not None and (best is None or hit[0] < best[0]):
                best = hit
        return best

    def segment_intersects(self, a, b) -> bool:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.distance(a) <= 0 or self.distance(b) <= 0:
            return True
        L = np.linalg.norm(b - a)
        if L == 0.0:
            return False
        hit = self.ray_hit(a, (b - a) / L)
        return hit is not None and hit[0] <= L


class PolylineObstacle(ConvexObstacle):
    """Convex obstacle given by a dense closed polyline (ellipse offsets)."""

    def __init__(self, points, id: int = 0):
        self.points = np.asarray(points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[0] < 8:
            raise ValueError("polyline obstacle needs a dense point list")
        if _signed_area(self.points) < 0:
            self.points = self.points[::-1].copy()
        self.id = id

    @property
    def center(self) -> np.ndarray:
        return self.points.mean(axis=0)

    def contains(self, q) -> bool:
        q = np.asarray(q, dtype=float)
        v = self.points
        w = np.roll(v, -1, axis=0)
        cross = (w[:, 0] - v[:, 0]) * (q[1] - v[:, 1]) - (w[:, 1] - v[:, 1]) * (q[0] - v[:, 0])
        return bool(np.all(cross >= -1e-9))

    def distance(self, q) -> float:
        q = np.asarray(q, dtype=float)
        v = self.points
        w = np.roll(v, -1, axis=0)
        e = w - v
        t = np.clip(np.einsum("ij,ij->i", q - v, e) / np.einsum("ij,ij->i", e, e), 0.0, 1.0)
        p = v + t[:, None] * e
        d = float(np.min(np.linalg.norm(q - p, axis=1)))
        return -d if self.contains(q) else d

    def project(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        v = self.points
        w = np.roll(v, -1, axis=0)
        e = w - v
        t = np.clip(np.einsum("ij,ij->i", q - v, e) / np.einsum("ij,ij->i", e, e), 0.0, 1.0)
        p = v + t[:, None] * e
        i = int(np.argmin(np.linalg.norm(q - p, axis=1)))
        return p[i]

    def ray_hit(self, origin, direction):
        return _ray_hit_polyline(origin, direction, self.points)

    def boundary_points(self, k: int) -> np.ndarray:
        idx = np.linspace(0, len(self.points), k, endpoint=False).astype(int)
        return self.points[idx]

    def segment_intersects(self, a, b) -> bool:
        return _segment_polyline_intersects(a, b, self, self.points)


def _ray_hit_polyline(origin, direction, pts):
    best = None
    nxt = np.roll(pts, -1, axis=0)
    for a, b in zip(pts, nxt):
        hit = ray_hit_segment(origin, direction, a, b)
        if hit is not None and (best is None or hit[0] < best[0]):
            best = hit
    return best


def _segment_polyline_intersects(a, b, obstacle, pts) -> bool:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if obstacle.contains(a) or obstacle.contains(b):
        return True
    L = np.linalg.norm(b - a)
    if L == 0.0:
        return False
    hit = _ray_hit_polyline(a, (b - a) / L, pts)
    return hit is not None and hit[0] <= L


def _signed_area(v: np.ndarray) -> float:
    w = np.roll(v, -1, axis=0)
    return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))


def _is_convex(v: np.ndarray) -> bool:
    n = len(v)
    for i in range(n):
        a, b, c = v[i], v[(i + 1) % n], v[(i + 2) % n]
        if (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) < -1e-12:
            return False
    return True


@dataclass
class World:
    workspace: Workspace
    obstacles: list
    n: int = 2

    def __post_init__(self):
        kinds = {isinstance(o, DiscObstacle) for o in self.obstacles}
        if len(kinds) > 1:
            raise ValueError("worlds are homogeneous: all-disc or all-convex")
        for i, o in enumerate(self.obstacles):
            if o.id == 0:
                o.id = i + 1
        if self.kind == "convex" and self.n != 2:
            raise ValueError("convex worlds are 2-D only")

    @property
    def kind(self) -> str:
        if not self.obstacles or isinstance(self.obstacles[0], DiscObstacle):
            return "disc"
        return "convex"

    @property
    def r0(self) -> float:
        return self.workspace.radius

    def obstacle(self, oid: int):
        for o in self.obstacles:
            if o.id == oid:
                return o
        raise KeyError(f"no obstacle with id {oid}")

    def in_free_space(self, q, tol: float = 0.0) -> bool:
        q = np.asarray(q, dtype=float)
        if np.linalg.norm(q) > self.r0 + tol:
            return False
        return all(o.distance(q) >= -tol for o in self.obstacles)

    def clearance(self, q) -> float:
        """Minimum distance to the free-space boundary (negative outside)."""
        q = np.asarray(q, dtype=float)
        c = self.r0 - float(np.linalg.norm(q))
        for o in self.obstacles:
            c = min(c, o.distance(q))
        return c

    def disc_arrays(self):
        """Obstacle centers (m, n) and radii (m,) for the compiled kernels."""
        if self.kind != "disc":
            raise ValueError("disc arrays only exist for disc worlds")
        if not self.obstacles:
            return np.zeros((0, self.n)), np.zeros(0)
        centers = np.array([o.center for o in self.obstacles], dtype=float)
        radii = np.array([o.radius for o in self.obstacles], dtype=float)
        return centers, radii


@dataclass
class Violation:
    kind: str  # overlap | boundary_contact | curvature | dimension
    obstacle_ids: tuple
    magnitude: float


@dataclass
class ValidationReport:
    ok: bool
    violations: list = field(default_factory=list)


def _pair_separation(a, b) -> float:
    if isinstance(a, DiscObstacle) and isinstance(b, DiscObstacle):
        return float(np.linalg.norm(a.center - b.center)) - a.radius - b.radius
    # convex-distance by dense boundary sampling
    pts = a.boundary_points(512) if not isinstance(a, DiscObstacle) else None
    if isinstance(a, DiscObstacle):
        return min(a.distance(p) for p in b.boundary_points(512))
    if isinstance(b, DiscObstacle):
        return min(b.distance(p) for p in pts)
    return min(b.distance(p) for p in pts)


def _boundary_separation(o, r0: float) -> float:
    if isinstance(o, DiscObstacle):
        return r0 - float(np.linalg.norm(o.center)) - o.radius
    return r0 - o.max_extent()


def validate(world: World) -> ValidationReport:
    """Check the separation assumptions; violations are data, not errors."""
    margin = SEPARATION_MARGIN * world.r0
    violations = []
    obs = world.obstacles
    for o in obs:
        if isinstance(o, DiscObstacle) and len(o.center) != world.n:
            violations.append(Violation("dimension", (o.id,), float(len(o.center) - world.n)))
    for i, a in enumerate(obs):
        sep = _boundary_separation(a, world.r0)
        if sep <= margin:
            violations.append(Violation("boundary_contact", (a.id,), sep))
        for b in obs[i + 1:]:
            sep = _pair_separation(a, b)
            if sep <= margin:
                violations.append(Violation("overlap", (a.id, b.id), sep))
    return ValidationReport(ok=not violations, violations=violations)


def check_curvature(obstacle, x_d, samples: int = 3600) -> bool:
    """Sufficient-curvature test at the boundary point farthest from x_d.

    True iff the obstacle fits inside the ball around x_d through that
    point. Always true for discs.
    """
    x_d = np.asarray(x_d, dtype=float)
    if obstacle.contains(x_d):
        raise ValueError("reference point lies inside the obstacle")
    if isinstance(obstacle, DiscObstacle):
        return True
    pts = obstacle.boundary_points(samples)
    dists = np.linalg.norm(pts - x_d, axis=1)
    # farthest point: inward normal there is aligned with (x_d - q)
    r = float(np.max(dists))
    return bool(np.all(dists <= r + 1e-9 * max(1.0, r)))


def dilate(obstacle, r: float):
    """Minkowski sum of an obstacle with a ball of radius r."""
    if r <= 0:
        raise ValueError("dilation radius must be positive")
    if isinstance(obstacle, DiscObstacle):
        return DiscObstacle(obstacle.center.copy(), obstacle.radius + r, id=obstacle.id)
    if isinstance(obstacle, ConvexPolygon):
        return RoundedPolygon(obstacle.vertices.copy(), r, id=obstacle.id)
    if isinstance(obstacle, RoundedPolygon):
        return RoundedPolygon(obstacle.core.vertices.copy(), obstacle.corner_radius + r, id=obstacle.id)
    if isinstance(obstacle, Ellipse):
        pts = obstacle.boundary_points(ELLIPSE_OFFSET_SEGMENTS)
        nxt = np.roll(pts, -1, axis=0)
        prv = np.roll(pts, 1, axis=0)
        tang = nxt - prv
        nrm = np.stack([tang[:, 1], -tang[:, 0]], axis=1)
        nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
        # normals point outward for a CCW polyline with this convention
        probe = pts[0] + 1e-6 * nrm[0]
        if obstacle.contains(probe):
            nrm = -nrm
        return PolylineObstacle(pts + r * nrm, id=obstacle.id)
    if isinstance(obstacle, PolylineObstacle):
        pts = obstacle.points
        nxt = np.roll(pts, -1, axis=0)
        prv = np.roll(pts, 1, axis=0)
        tang = nxt - prv
        nrm = np.stack([tang[:, 1], -tang[:, 0]], axis=1)
        nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
        probe = pts[0] + 1e-6 * nrm[0]
        if obstacle.contains(probe):
            nrm = -nrm
        return PolylineObstacle(pts + r * nrm, id=obstacle.id)
    raise TypeError(f"cannot dilate {type(obstacle).__name__}")


def erode_workspace(workspace: Workspace, r: float) -> Workspace:
    if r <= 0:
        raise ValueError("erosion radius must be positive")
    if r >= workspace.radius:
        raise ValueError("erosion radius exceeds the workspace radius")
    return Workspace(workspace.radius - r)


def random_world(
    seed: int,
    m: int,
    n: int = 2,
    min_separation: float = 0.5,
    radius_range=(0.6, 1.2),
    r0: float = 10.0,
    max_rejections: int = 10_000,
    keep_clear=None,
) -> World:
    """Rejection-sample a valid disc world; deterministic for a fixed seed.

    ``keep_clear`` is an optional list of (point, radius) regions that
    obstacles must avoid (used to keep the destination in free space).
    """
    rng = np.random.default_rng(seed)
    obstacles: list = []
    lo, hi = radius_range
    for k in range(m):
        for attempt in range(max_rejections):
            r = rng.uniform(lo, hi)
            c = rng.uniform(-r0 + r + min_separation, r0 - r - min_separation, size=n)
            if np.linalg.norm(c) + r > r0 - min_separation:
                continue
            if keep_clear and any(
                np.linalg.norm(c - np.asarray(p, dtype=float)) < r + rad for p, rad in keep_clear
            ):
                continue
            if all(
                np.linalg.norm(c - o.center) - r - o.radius >= min_separation for o in obstacles
            ):
                obstacles.append(DiscObstacle(c, r, id=k + 1))
                break
        else:
            raise RuntimeError(f"packing infeasible: obstacle {k + 1} rejected {max_rejections} times")
    world = World(Workspace(r0), obstacles, n=n)
    report = validate(world)
    if not report.ok:
        raise RuntimeError(f"random world failed validation: {report.violations}")
    return world


# --- JSON schema (the only serialized form of a World) ---

def world_to_dict(world: World, destination=None) -> dict:
    obstacles = []
    for o in world.obstacles:
        if isinstance(o, DiscObstacle):
            obstacles.append({"type": "disc", "center": list(o.center), "radius": o.radius})
        elif isinstance(o, Ellipse):
            obstacles.append(
                {
                    "type": "ellipse",
                    "center": list(o.center),
                    "semi_axes": list(o.semi_axes),
                    "rotation": o.rotation,
                }
            )
        elif isinstance(o, ConvexPolygon):
            obstacles.append({"type": "polygon", "vertices": o.vertices.tolist()})
        elif isinstance(o, RoundedPolygon):
            obstacles.append(
                {
                    "type": "rounded_polygon",
                    "vertices": o.core.vertices.tolist(),
                    "corner_radius": o.corner_radius,
                }
            )
        else:
            raise TypeError(f"cannot serialize {type(o).__name__}")
    doc = {
        "version": 1,
        "n": world.n,
        "workspace": {"r0": world.r0},
        "obstacles": obstacles,
    }
    if destination is not None:
        doc["destination"] = [float(v) for v in destination]
    return doc


def world_from_dict(doc: dict):
    if doc.get("version") != 1:
        raise ValueError("unsupported world file version")
    obstacles = []
    for i, spec in enumerate(doc["obstacles"]):
        oid = i + 1
        t = spec["type"]
        if t == "disc":
            obstacles.append(DiscObstacle(spec["center"], spec["radius"], id=oid))
        elif t == "ellipse":
            obstacles.append(
                Ellipse(spec["center"], spec["semi_axes"], spec.get("rotation", 0.0), id=oid)
            )
        elif t == "polygon":
            obstacles.append(ConvexPolygon(spec["vertices"], id=oid))
        elif t == "rounded_polygon":
            obstacles.append(RoundedPolygon(spec["vertices"], spec["corner_radius"], id=oid))
        else:
            raise ValueError(f"unknown obstacle type {t!r}")
    world = World(Workspace(doc["workspace"]["r0"]), obstacles, n=doc.get("n", 2))
    destination = doc.get("destination")
    dest = np.asarray(destination, dtype=float) if destination is not None else None
    return world, dest
