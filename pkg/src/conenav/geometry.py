"""Vector, cone, half-space, and ray primitives in n dimensions.

All predicates here are pure and stateless. A single numeric policy is used
throughout the package: angular comparisons use an absolute tolerance of
``ANGLE_TOL`` radians, unit-vector checks use ``UNIT_TOL``, and length
comparisons are scaled by the workspace radius at the call site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ANGLE_TOL = 1e-9
UNIT_TOL = 1e-12

_SENSES = ("=", "<", "<=", ">", ">=")


def as_vec(x) -> np.ndarray:
    """Coerce to a float64 1-D array without copying when possible."""
    return np.asarray(x, dtype=float)


def norm(v) -> float:
    return float(np.linalg.norm(v))


def unit(v) -> np.ndarray:
    """Normalize a nonzero vector."""
    v = as_vec(v)
    n = norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def proj_parallel(v, x) -> np.ndarray:
    """Projection of x onto the line spanned by the unit vector v."""
    v = as_vec(v)
    x = as_vec(x)
    if abs(norm(v) - 1.0) > 1e-9:
        raise ValueError("proj_parallel requires a unit vector")
    return v * float(v @ x)


def proj_orthogonal(v, x) -> np.ndarray:
    """Projection of x onto the hyperplane orthogonal to the unit vector v."""
    x = as_vec(x)
    return x - proj_parallel(v, x)


def angle(x, y) -> float:
    """Angle between two nonzero vectors, in [0, pi].

    The cosine is clamped to [-1, 1] before acos so rounding never
    produces NaN.
    """
    x = as_vec(x)
    y = as_vec(y)
    nx = norm(x)
    ny = norm(y)
    if nx == 0.0 or ny == 0.0:
        raise ValueError("angle undefined for the zero vector")
    c = float(x @ y) / (nx * ny)
    return math.acos(min(1.0, max(-1.0, c)))


@dataclass(frozen=True)
class Cone:
    """Cone with vertex, nonzero axis, and half-aperture in (0, pi/2]."""

    vertex: np.ndarray
    axis: np.ndarray
    half_aperture: float

    def __post_init__(self):
        object.__setattr__(self, "vertex", as_vec(self.vertex))
        object.__setattr__(self, "axis", as_vec(self.axis))
        if norm(self.axis) == 0.0:
            raise ValueError("cone axis must be nonzero")
        if not (0.0 < self.half_aperture <= math.pi / 2):
            raise ValueError("half-aperture must lie in (0, pi/2]")


@dataclass(frozen=True)
class HalfSpace:
    """Half-space (or hyperplane) through an anchor with a given normal."""

    anchor: np.ndarray
    normal: np.ndarray
    sense: str = "<="

    def __post_init__(self):
        object.__setattr__(self, "anchor", as_vec(self.anchor))
        object.__setattr__(self, "normal", as_vec(self.normal))
        if norm(self.normal) == 0.0:
            raise ValueError("half-space normal must be nonzero")
        if self.sense not in _SENSES:
            raise ValueError(f"unknown sense {self.sense!r}")

    def contains(self, q) -> bool:
        s = float(self.normal @ (as_vec(q) - self.anchor))
        return _compare(s, 0.0, self.sense, ANGLE_TOL)


def _compare(lhs: float, rhs: float, sense: str, tol: float) -> bool:
    d = lhs - rhs
    if sense == "=":
        return abs(d) <= tol
    if sense == "<":
        return d < -tol
    if sense == "<=":
        return d <= tol
    if sense == ">":
        return d > tol
    if sense == ">=":
        return d >= -tol
    raise ValueError(f"unknown sense {sense!r}")


def cone_contains(q, cone: Cone, sense: str = "<=") -> bool:
    """Membership of q in the conic subset with the given sense.

    Evaluates ``||v|| ||q - x|| cos(psi)  <sense>  v^T (q - x)``. The vertex
    itself satisfies "<=", "=", and ">=" (both sides vanish).
    """
    if sense not in _SENSES:
        raise ValueError(f"unknown sense {sense!r}")
    q = as_vec(q)
    d = q - cone.vertex
    lhs = norm(cone.axis) * norm(d) * math.cos(cone.half_aperture)
    rhs = float(cone.axis @ d)
    # "<"/"<=" select the cone interior (cos psi below the direction cosine),
    # ">"/">=" the exterior.
    return _compare(lhs, rhs, sense, ANGLE_TOL * max(1.0, norm(cone.axis) * norm(d)))


def segment_point_distance(a, b, p) -> float:
    """Minimum distance from point p to the segment [a, b]."""
    a = as_vec(a)
    b = as_vec(b)
    p = as_vec(p)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return norm(p - a)
    t = float((p - a) @ ab) / denom
    t = min(1.0, max(0.0, t))
    return norm(p - (a + t * ab))


def segment_disc_intersects(a, b, center, radius: float) -> bool:
    """True iff the segment [a, b] meets the closed ball B(center, radius).

    Tangency counts as intersecting. A degenerate segment (a == b) reduces
    to a point-in-ball test.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    return segment_point_distance(a, b, center) <= radius


def ray_hit_disc(origin, direction, center, radius: float):
    """Nearest intersection of a ray with a sphere surface.

    Returns ``(distance, point)`` or ``None``. ``direction`` must be unit.
    """
    o = as_vec(origin)
    d = as_vec(direction)
    oc = o - as_vec(center)
    b = float(d @ oc)
    c = float(oc @ oc) - radius * radius
    disc = b * b - c
    if disc < 0.0:
        return None
    s = math.sqrt(disc)
    t = -b - s
    if t < 0.0:
        t = -b + s
    if t < 0.0:
        return None
    return t, o + t * d


def ray_hit_workspace(origin, direction, r0: float):
    """Distance along a ray from inside the workspace ball to its boundary."""
    o = as_vec(origin)
    d = as_vec(direction)
    b = float(d @ o)
    c = float(o @ o) - r0 * r0
    disc = b * b - c
    if disc < 0.0:
        return None
    t = -b + math.sqrt(disc)
    if t < 0.0:
        return None
    return t, o + t * d


def ray_hit_segment(origin, direction, p, q):
    """Intersection of a 2-D ray with the segment [p, q]; (t, point) or None."""
    o = as_vec(origin)
    d = as_vec(direction)
    p = as_vec(p)
    q = as_vec(q)
    e = q - p
    denom = d[0] * (-e[1]) - d[1] * (-e[0])
    if abs(denom) < 1e-15:
        return None
    rhs = p - o
    t = (rhs[0] * (-e[1]) - rhs[1] * (-e[0])) / denom
    s = (d[0] * rhs[1] - d[1] * rhs[0]) / denom
    if t < 0.0 or s < -1e-12 or s > 1.0 + 1e-12:
        return None
    return float(t), o + t * d


def ray_hit_ellipse(origin, direction, center, semi_axes, rotation: float):
    """Nearest ray intersection with an ellipse boundary; (t, point) or None."""
    o = as_vec(origin)
    d = as_vec(direction)
    a, b = semi_axes
    cr = math.cos(rotation)
    sr = math.sin(rotation)
    # Map into the ellipse frame and scale to the unit circle.
    rel = o - as_vec(center)
    ox = (cr * rel[0] + sr * rel[1]) / a
    oy = (-sr * rel[0] + cr * rel[1]) / b
    dx = (cr * d[0] + sr * d[1]) / a
    dy = (-sr * d[0] + cr * d[1]) / b
    A = dx * dx + dy * dy
    B = ox * dx + oy * dy
    C = ox * ox + oy * oy - 1.0
    disc = B * B - A * C
    if disc < 0.0 or A == 0.0:
        return None
    s = math.sqrt(disc)
    t = (-B - s) / A
    if t < 0.0:
        t = (-B + s) / A
    if t < 0.0:
        return None
    return float(t), o + t * d


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a
