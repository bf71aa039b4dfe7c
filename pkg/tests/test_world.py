import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conenav.world import (
    ConvexPolygon,
    DiscObstacle,
    Ellipse,
    RoundedPolygon,
    Workspace,
    World,
    check_curvature,
    dilate,
    erode_workspace,
    random_world,
    validate,
    world_from_dict,
    world_to_dict,
)


def test_disc_distance_and_projection():
    o = DiscObstacle(id=1, center=np.array([3.0, 0.0]), radius=1.0)
    assert o.distance(np.array([0.0, 0.0])) == pytest.approx(2.0)
    assert o.distance(np.array([3.0, 0.5])) == pytest.approx(-0.5)
    p = o.project(np.array([0.0, 0.0]))
    assert np.allclose(p, [2.0, 0.0])


def test_ellipse_distance_degenerates_to_circle():
    e = Ellipse(id=1, center=np.zeros(2), semi_axes=(1.0, 1.0), rotation=0.7)
    for q in ([3.0, 0.0], [0.0, -2.5], [1.2, 1.2]):
        assert e.distance(np.array(q)) == pytest.approx(np.linalg.norm(q) - 1.0, abs=1e-9)


def test_ellipse_projection_on_boundary():
    e = Ellipse(id=1, center=np.array([1.0, -2.0]), semi_axes=(2.0, 0.5), rotation=0.3)
    q = np.array([5.0, 1.0])
    p = e.project(q)
    # projected point satisfies the implicit equation
    local = e._to_local(p)
    assert (local[0] / 2.0) ** 2 + (local[1] / 0.5) ** 2 == pytest.approx(1.0, abs=1e-8)
    assert np.linalg.norm(q - p) == pytest.approx(e.distance(q), abs=1e-8)


def test_dilate_disc():
    o = DiscObstacle(id=1, center=np.zeros(2), radius=1.0)
    d = dilate(o, 0.25)
    assert isinstance(d, DiscObstacle)
    assert d.radius == pytest.approx(1.25)


def test_dilate_square_perimeter():
    sq = ConvexPolygon(id=1, vertices=np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
    d = dilate(sq, 0.2)
    assert d.perimeter() == pytest.approx(4.0 + 2.0 * math.pi * 0.2)


def test_erode_workspace():
    assert erode_workspace(Workspace(10.0), 0.5).radius == pytest.approx(9.5)


def test_rounded_polygon_ray_hit_exact():
    rp = RoundedPolygon(
        id=1, vertices=np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]), corner_radius=0.5
    )
    # straight-on edge hit
    hit = rp.ray_hit(np.array([-3.0, 1.0]), np.array([1.0, 0.0]))
    assert hit[0] == pytest.approx(2.5)
    # corner-circle hit along the diagonal toward vertex (0,0)
    d = np.array([1.0, 1.0]) / math.sqrt(2.0)
    hit = rp.ray_hit(np.array([-2.0, -2.0]), d)
    assert hit[0] == pytest.approx(2.0 * math.sqrt(2.0) - 0.5)


@given(st.integers(min_value=0, max_value=200))
@settings(max_examples=25, deadline=None)
def test_random_world_always_validates(seed):
    w = random_world(seed=seed, m=5, r0=10.0)
    assert validate(w).ok


def test_validate_flags_overlap():
    w = World(
        workspace=Workspace(10.0),
        obstacles=[
            DiscObstacle(id=1, center=np.array([0.0, 0.0]), radius=1.0),
            DiscObstacle(id=2, center=np.array([1.5, 0.0]), radius=1.0),
        ],
    )
    rep = validate(w)
    assert not rep.ok
    assert any(v.kind == "overlap" for v in rep.violations)


def test_validate_flags_boundary_contact():
    w = World(
        workspace=Workspace(10.0),
        obstacles=[DiscObstacle(id=1, center=np.array([9.5, 0.0]), radius=1.0)],
    )
    assert not validate(w).ok


def test_check_curvature_disc_always_ok():
    o = DiscObstacle(id=1, center=np.array([2.0, 1.0]), radius=0.8)
    for xd in ([0.0, 0.0], [5.0, 5.0], [-4.0, 1.0]):
        assert check_curvature(o, np.array(xd))


def test_dilated_world_validates_in_eroded_workspace():
    # separation strictly greater than 2r keeps the assumptions after dilation
    w = random_world(seed=7, m=4, r0=10.0, min_separation=0.8)
    r = 0.3
    dil = World(
        workspace=erode_workspace(w.workspace, r),
        obstacles=[dilate(o, r) for o in w.obstacles],
    )
    assert validate(dil).ok


def test_world_json_round_trip(reference_world):
    doc = world_to_dict(reference_world, destination=np.zeros(2))
    clone, _ = world_from_dict(json.loads(json.dumps(doc)))
    assert clone.r0 == reference_world.r0
    for a, b in zip(reference_world.obstacles, clone.obstacles):
        assert a.id == b.id
        assert np.allclose(a.center, b.center, atol=1e-12)
        assert a.radius == pytest.approx(b.radius, abs=1e-12)


def test_keep_clear_respected():
    w = random_world(seed=5, m=6, r0=10.0, keep_clear=[((0.0, 0.0), 1.5)])
    for o in w.obstacles:
        assert o.distance(np.zeros(2)) >= 1.5 - 1e-9
