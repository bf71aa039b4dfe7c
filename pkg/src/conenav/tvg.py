"""Exact 2-D shortest paths among disjoint discs.

Builds the tangent visibility graph (tangent points from the endpoints,
the four bitangents per disc pair, boundary arcs between consecutive
tangent points) and searches it with Dijkstra. Used as the optimality
oracle for path-length experiments.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .geometry import segment_point_distance
from .world import World

CLEARANCE_TOL = 1e-9


@dataclass
class Node:
    point: np.ndarray
    kind: str  # start | goal | tangent_point
    obstacle_id: Optional[int] = None
    angle: Optional[float] = None  # boundary angle on its disc


@dataclass
class Edge:
    a: int
    b: int
    kind: str  # segment | arc
    length: float
    obstacle_id: Optional[int] = None
    signed_angle: float = 0.0


@dataclass
class TangentGraph:
    nodes: List[Node]
    edges: List[Edge]
    adjacency: List[List[Tuple[int, int]]] = field(default_factory=list)  # (neighbor, edge)

    def __post_init__(self):
        if not self.adjacency:
            self.adjacency = [[] for _ in self.nodes]
            for e_idx, e in enumerate(self.edges):
                self.adjacency[e.a].append((e.b, e_idx))
                self.adjacency[e.b].append((e.a, e_idx))


@dataclass
class OraclePath:
    node_indices: List[int]
    points: List[np.ndarray]
    length: float
    edges: List[Edge]


def _rot(v, a):
    c, s = math.cos(a), math.sin(a)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def _point_tangents(p, c, r):
    """Tangency points on the circle (c, r) of the tangents through p."""
    d = np.linalg.norm(p - c)
    if d <= r:
        raise ValueError("tangent source inside the disc")
    phi = math.acos(r / d)
    u = (p - c) / d
    return [c + r * _rot(u, phi), c + r * _rot(u, -phi)]


def _bitangents(ci, ri, cj, rj):
    """[(Ti, Tj)] for the outer and inner bitangent lines of two discs."""
    d = float(np.linalg.norm(cj - ci))
    u = (cj - ci) / d
    out = []
    # outer: tangency radii parallel on the same side
    ca = (ri - rj) / d
    if abs(ca) <= 1.0:
        phi = math.acos(ca)
        for s in (+1.0, -1.0):
            n = _rot(u, s * phi)
            out.append((ci + ri * n, cj + rj * n))
    # inner: radii antiparallel (tangent line crosses between the discs)
    ca = (ri + rj) / d
    if abs(ca) <= 1.0:
        phi = math.acos(ca)
        for s in (+1.0, -1.0):
            n = _rot(u, s * phi)
            out.append((ci + ri * n, cj - rj * n))
    return out


def _segment_free(a, b, centers, radii, skip=()) -> bool:
    for k in range(len(radii)):
        if segment_point_distance(a, b, centers[k]) < radii[k] - CLEARANCE_TOL:
            return False
    return True


def _arc_free(c, r, a1, a2, centers, radii, own, r0) -> bool:
    """Sampled clearance check of the CCW arc from angle a1 to a2."""
    span = (a2 - a1) % (2.0 * math.pi)
    m = max(4, int(span / 0.05))
    for t in np.linspace(0.0, span, m):
        q = c + r * np.array([math.cos(a1 + t), math.sin(a1 + t)])
        if np.linalg.norm(q) > r0 + CLEARANCE_TOL:
            return False
        for k in range(len(radii)):
            if k == own:
                continue
            if np.linalg.norm(q - centers[k]) < radii[k] - CLEARANCE_TOL:
                return False
    return True


def build_tvg(world: World, x0, x_d) -> TangentGraph:
    if world.kind != "disc" or world.n != 2:
        raise ValueError("the shortest-path oracle needs a 2-D disc world")
    x0 = np.asarray(x0, dtype=float)
    x_d = np.asarray(x_d, dtype=float)
    if not world.in_free_space(x0) or not world.in_free_space(x_d):
        raise ValueError("endpoints must lie in free space")
    centers, radii = world.disc_arrays()
    m = len(radii)

    nodes = [Node(x0, "start"), Node(x_d, "goal")]
    per_disc: List[List[int]] = [[] for _ in range(m)]

    def add_tp(point, k):
        ang = math.atan2(point[1] - centers[k][1], point[0] - centers[k][0])
        nodes.append(Node(point, "tangent_point", obstacle_id=k, angle=ang))
        per_disc[k].append(len(nodes) - 1)

    for k in range(m):
        for p_idx in (0, 1):
            for tp in _point_tangents(nodes[p_idx].point, centers[k], radii[k]):
                add_tp(tp, k)
    pair_tangents = []  # (node_i, node_j)
    for i in range(m):
        for j in range(i + 1, m):
            for ti, tj in _bitangents(centers[i], radii[i], centers[j], radii[j]):
                add_tp(ti, i)
                ni = len(nodes) - 1
                add_tp(tj, j)
                pair_tangents.append((ni, len(nodes) - 1))

    edges: List[Edge] = []

    def add_segment(a, b):
        pa, pb = nodes[a].point, nodes[b].point
        if _segment_free(pa, pb, centers, radii):
            edges.append(Edge(a, b, "segment", float(np.linalg.norm(pb - pa))))

    add_segment(0, 1)
    # endpoint-to-tangent-point segments (trying every tangent point keeps
    # the graph complete; blocked candidates are filtered by the check)
    for k in range(m):
        for idx in per_disc[k]:
            add_segment(0, idx)
            add_segment(1, idx)
    for a, b in pair_tangents:
        add_segment(a, b)
    # boundary arcs between consecutive tangent points
    for k in range(m):
        idxs = sorted(per_disc[k], key=lambda i: (nodes[i].angle, i))
        t = len(idxs)
        for q in range(t):
            a = idxs[q]
            b = idxs[(q + 1) % t]
            if a == b:
                continue
            a1, a2 = nodes[a].angle, nodes[b].angle
            span = (a2 - a1) % (2.0 * math.pi)
            if span == 0.0:
                continue
            if _arc_free(centers[k], radii[k], a1, a2, centers, radii, k, world.r0):
                edges.append(
                    Edge(a, b, "arc", radii[k] * span, obstacle_id=k, signed_angle=span)
                )
    return TangentGraph(nodes=nodes, edges=edges)


def shortest_path(graph: TangentGraph, start: int = 0, goal: int = 1) -> OraclePath:
    n = len(graph.nodes)
    dist = [math.inf] * n
    prev: List[Optional[Tuple[int, int]]] = [None] * n
    dist[start] = 0.0
    heap = [(0.0, start)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if u == goal:
            break
        for v, e_idx in graph.adjacency[u]:
            nd = d + graph.edges[e_idx].length
            if nd < dist[v]:
                dist[v] = nd
                prev[v] = (u, e_idx)
                heapq.heappush(heap, (nd, v))
    if not math.isfinite(dist[goal]):
        raise RuntimeError("goal unreachable in the tangent graph")
    node_indices = [goal]
    path_edges = []
    u = goal
    while prev[u] is not None:
        u, e_idx = prev[u]
        node_indices.append(u)
        path_edges.append(graph.edges[e_idx])
    node_indices.reverse()
    path_edges.reverse()
    return OraclePath(
        node_indices=node_indices,
        points=[graph.nodes[i].point for i in node_indices],
        length=dist[goal],
        edges=path_edges,
    )


def rld(l_a: float, l_0: float) -> float:
    """Relative length difference, as a signed percentage."""
    if l_0 <= 0:
        raise ValueError("reference length must be positive")
    return 100.0 * (l_a - l_0) / l_0


def path_match(controller_length: float, oracle_length: float, rel_tol: float = 0.005) -> bool:
    if controller_length <= 0 or oracle_length <= 0:
        raise ValueError("lengths must be positive")
    return bool((controller_length - oracle_length) / oracle_length <= rel_tol)
