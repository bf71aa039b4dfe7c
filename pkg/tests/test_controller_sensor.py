import csv
import math

import numpy as np
import pytest

from conenav.controller_map import ControlParams, control
from conenav.controller_sensor import (
    LidarScan,
    LidarSpec,
    UnicycleParams,
    dilate_detected_corners,
    extend_arcs,
    extract_arcs,
    scan,
    scan_to_csv,
    sensor_control,
    unicycle_transform,
    virtual_cone,
)
from conenav.world import DiscObstacle, World, Workspace


def make_scan(rhos, R=5.0, origin=(0.0, 0.0)):
    n = len(rhos)
    thetas = np.deg2rad(np.arange(n) * 360.0 / n)
    return LidarScan(
        origin=np.asarray(origin, dtype=float),
        thetas=thetas,
        rhos=np.asarray(rhos, dtype=float),
        R=R,
    )


# ---------------------------------------------------------------- scanning


def test_scan_single_disc_exact(single_disc_world):
    spec = LidarSpec(resolution_deg=1.0, R=3.4)
    s = scan(np.array([6.0, 0.0]), single_disc_world, spec)
    # the beam straight at the disc center hits the near boundary
    assert s.rhos[180] == pytest.approx(2.0, abs=1e-12)
    # beams that miss everything are clamped to R
    assert s.rhos[90] == pytest.approx(3.4)
    assert len(s.rhos) == 360


def test_scan_noise_is_reproducible(single_disc_world):
    spec = LidarSpec(resolution_deg=1.0, R=3.4, noise_sigma_range=0.02)
    a = scan(np.array([6.0, 0.0]), single_disc_world, spec, rng=np.random.default_rng(3))
    b = scan(np.array([6.0, 0.0]), single_disc_world, spec, rng=np.random.default_rng(3))
    assert np.array_equal(a.rhos, b.rhos)
    assert np.all(a.rhos <= 3.4)


def test_lidar_spec_validation():
    with pytest.raises(ValueError):
        LidarSpec(resolution_deg=0.7)  # does not divide 360
    with pytest.raises(ValueError):
        LidarSpec(R=0.0)


# ----------------------------------------------------- arc extract / extend


def test_extract_single_run():
    rhos = np.full(72, 5.0)
    rhos[10:21] = 2.0
    arcs = extract_arcs(make_scan(rhos))
    assert len(arcs.arcs) == 1
    assert np.array_equal(arcs.arcs[0], np.arange(10, 21))


def test_extract_splits_on_depth_jump():
    # one contiguous run of returns, but with a large radial discontinuity
    # in the middle: two bodies, two arcs
    rhos = np.full(72, 5.0)
    rhos[10:15] = 1.0
    rhos[15:21] = 3.5
    arcs = extract_arcs(make_scan(rhos))
    assert len(arcs.arcs) == 2
    assert np.array_equal(arcs.arcs[0], np.arange(10, 15))
    assert np.array_equal(arcs.arcs[1], np.arange(15, 21))


def test_extract_wraps_around_zero():
    rhos = np.full(72, 5.0)
    rhos[70:] = 2.0
    rhos[:3] = 2.0
    arcs = extract_arcs(make_scan(rhos))
    assert len(arcs.arcs) == 1
    assert set(arcs.arcs[0]) == {70, 71, 0, 1, 2}


def test_extended_arcs_cover_and_abut():
    # two runs separated by a single free sample: extensions meet there
    rhos = np.full(72, 5.0)
    rhos[10:21] = 2.0
    rhos[22:31] = 2.0
    s = make_scan(rhos)
    arcs = extend_arcs(s, extract_arcs(s))
    assert len(arcs.extended) == 2
    for run, ext in zip(arcs.arcs, arcs.extended):
        assert set(run) <= set(ext)
    # shared free endpoint, no occupied overlap
    assert 21 in set(arcs.extended[0]) and 21 in set(arcs.extended[1])
    occupied_overlap = (set(arcs.extended[0]) & set(arcs.extended[1])) - {21}
    assert occupied_overlap == set()


def test_extended_endpoints_reach_free_samples(single_disc_world):
    spec = LidarSpec(resolution_deg=0.5, R=3.4)
    s = scan(np.array([6.0, 0.0]), single_disc_world, spec)
    arcs = extend_arcs(s, extract_arcs(s))
    assert len(arcs.arcs) == 1
    ext = arcs.extended[0]
    assert s.rhos[ext[0]] >= s.R - 1e-9
    assert s.rhos[ext[-1]] >= s.R - 1e-9


def test_arcs_disjoint(reference_world):
    rng = np.random.default_rng(11)
    spec = LidarSpec(resolution_deg=0.5, R=3.4)
    for _ in range(20):
        x = rng.uniform(-8.0, 8.0, size=2)
        if not reference_world.in_free_space(x, tol=0.05):
            continue
        arcs = extract_arcs(scan(x, reference_world, spec))
        seen = set()
        for run in arcs.arcs:
            assert seen.isdisjoint(run)
            seen.update(int(i) for i in run)


# ---------------------------------------------------------------- the cone


def test_virtual_cone_none_when_clear(single_disc_world):
    spec = LidarSpec(resolution_deg=0.5, R=3.4)
    x = np.array([6.0, 0.0])
    s = scan(x, single_disc_world, spec)
    arcs = extend_arcs(s, extract_arcs(s))
    # destination to the side: line of sight clear
    assert virtual_cone(x, np.array([6.0, 3.0]), arcs, s) is None


def test_virtual_cone_collinear_example(single_disc_world):
    # x=(6,0), disc at (3,0) r=1, destination at the origin behind it:
    # the closest arc point is the near boundary point (4,0)
    spec = LidarSpec(resolution_deg=0.25, R=3.4)
    x = np.array([6.0, 0.0])
    s = scan(x, single_disc_world, spec)
    arcs = extend_arcs(s, extract_arcs(s))
    cone = virtual_cone(x, np.zeros(2), arcs, s)
    assert cone is not None
    spacing = math.radians(0.25) * 2.0
    assert np.linalg.norm(cone.c_tilde - np.array([4.0, 0.0])) <= spacing
    assert cone.beta_tilde == pytest.approx(0.0, abs=1e-9)
    assert 0.0 < cone.theta_tilde <= 0.5 * math.pi


def test_sensor_control_visible_is_nominal(single_disc_world):
    spec = LidarSpec(resolution_deg=0.5, R=3.4)
    x = np.array([6.0, 0.0])
    out = sensor_control(x, np.array([8.0, 2.0]), single_disc_world, spec, ControlParams())
    assert out.mode == "visible"
    assert np.allclose(out.u, np.array([2.0, 2.0]))


def test_sensor_control_antipodal_zero(single_disc_world):
    # destination exactly behind the disc: beta = 0 and the command vanishes
    spec = LidarSpec(resolution_deg=0.25, R=3.4)
    out = sensor_control(
        np.array([6.0, 0.0]), np.zeros(2), single_disc_world, spec, ControlParams()
    )
    assert out.mode == "projected"
    assert np.linalg.norm(out.u) <= 2.0 * math.radians(0.25) * np.linalg.norm([6.0, 0.0])


def test_dense_scan_matches_map_controller(single_disc_world):
    # with a dense scan the sensor command direction agrees with the
    # map-based single-obstacle command to within twice the beam spacing
    spec = LidarSpec(resolution_deg=0.25, R=3.4)
    params = ControlParams()
    worst = 0.0
    for x in [np.array([6.0, 0.6]), np.array([5.5, -0.9]), np.array([6.5, 1.2])]:
        out_s = sensor_control(x, np.zeros(2), single_disc_world, spec, params)
        out_m = control(x, np.zeros(2), single_disc_world, params)
        if out_s.mode != "projected" or out_m.mode != "projected":
            continue
        a = out_s.u / np.linalg.norm(out_s.u)
        b = out_m.u / np.linalg.norm(out_m.u)
        worst = max(worst, math.acos(np.clip(a @ b, -1.0, 1.0)))
    assert worst <= 2.0 * math.radians(0.25)


def test_safety_ray_invariant(reference_world):
    # the projected command never aims into the active occupied sector:
    # the ray along u reaches distance ||c_tilde - x|| before touching the
    # detected polyline
    rng = np.random.default_rng(13)
    spec = LidarSpec(resolution_deg=0.5, R=3.4)
    checked = 0
    while checked < 60:
        x = rng.uniform(-8.0, 8.0, size=2)
        if not reference_world.in_free_space(x, tol=0.05):
            continue
        s = scan(x, reference_world, spec)
        arcs = extend_arcs(s, extract_arcs(s))
        out = sensor_control(
            x, np.zeros(2), reference_world, spec, ControlParams(), scan_=s
        )
        if out.mode != "projected" or np.linalg.norm(out.u) < 1e-9:
            continue
        checked += 1
        d_free = np.linalg.norm(out.cone.c_tilde - x)
        direction = out.u / np.linalg.norm(out.u)
        pts = s.points()[arcs.arcs[out.cone.active_arc]]
        for a, b in zip(pts[:-1], pts[1:]):
            e = b - a
            det = direction[0] * e[1] - direction[1] * e[0]
            if abs(det) < 1e-14:
                continue
            w = a - x
            t = (e[0] * w[1] - e[1] * w[0]) / det
            u_param = (direction[0] * w[1] - direction[1] * w[0]) / det
            if 0.0 <= u_param <= 1.0 and t >= 0.0:
                assert t >= d_free * (1.0 - 1e-6)


def test_dilation_widens_and_pulls_closer(single_disc_world):
    spec = LidarSpec(resolution_deg=0.5, R=3.4)
    x = np.array([6.0, 0.5])
    base = sensor_control(x, np.zeros(2), single_disc_world, spec, ControlParams())
    fat = sensor_control(
        x, np.zeros(2), single_disc_world, spec, ControlParams(), corner_radius=0.1
    )
    assert base.mode == fat.mode == "projected"
    assert fat.cone.theta_tilde > base.cone.theta_tilde
    assert np.linalg.norm(fat.cone.c_tilde - x) == pytest.approx(
        np.linalg.norm(base.cone.c_tilde - x) - 0.1, abs=1e-9
    )


def test_corner_dilation_aperture_growth():
    # endpoint at distance 2 from x, ball radius 0.2: the visible ball
    # widens the subtended half-angle by arcsin(0.1)
    x = np.zeros(2)
    pts = np.stack([np.full(9, 2.0), np.linspace(0.0, 0.4, 9)], axis=1)
    grown = dilate_detected_corners(pts, x, r=0.2, samples=4096)
    def half_width(p):
        ang = np.arctan2(p[:, 1], p[:, 0])
        return ang.max() - ang.min()
    expected = math.asin(0.2 / 2.0)
    measured = half_width(grown) - half_width(pts)
    assert measured <= 2.0 * expected + 1e-9
    assert measured >= expected - 5e-3
    with pytest.raises(ValueError):
        dilate_detected_corners(pts, x, r=0.0)


# ---------------------------------------------------------------- unicycle


def test_unicycle_aligned_heading():
    p = UnicycleParams()
    u = np.array([0.2, 0.0])
    v, omega = unicycle_transform(u, 0.0, p)
    assert v == pytest.approx(min(p.v_max, p.k_v * 0.2))
    assert omega == pytest.approx(0.0)


def test_unicycle_reversed_heading_turns_in_place():
    p = UnicycleParams()
    v, omega = unicycle_transform(np.array([1.0, 0.0]), math.pi, p)
    assert v == pytest.approx(0.0, abs=1e-12)
    assert abs(omega) == pytest.approx(p.omega_max)


def test_unicycle_limits_hold_everywhere():
    p = UnicycleParams()
    rng = np.random.default_rng(17)
    for _ in range(2000):
        u = rng.normal(size=2) * rng.uniform(0.0, 50.0)
        psi = rng.uniform(-math.pi, math.pi)
        v, omega = unicycle_transform(u, psi, p)
        assert 0.0 <= v <= p.v_max + 1e-12
        assert abs(omega) <= p.omega_max + 1e-12
    assert unicycle_transform(np.zeros(2), 0.3, p) == (0.0, 0.0)


def test_unicycle_omega_contracts_heading_error():
    p = UnicycleParams()
    for dpsi in (0.4, -0.4, 2.0, -2.0):
        _, omega = unicycle_transform(np.array([1.0, 0.0]), dpsi, p)
        assert omega * dpsi < 0.0


def test_unicycle_params_validation():
    with pytest.raises(ValueError):
        UnicycleParams(v_max=0.0)


# ------------------------------------------------------------------- I/O


def test_scan_to_csv(tmp_path, single_disc_world):
    spec = LidarSpec(resolution_deg=1.0, R=3.4)
    s = scan(np.array([6.0, 0.0]), single_disc_world, spec)
    arcs = extend_arcs(s, extract_arcs(s))
    path = tmp_path / "scan.csv"
    scan_to_csv(s, arcs, str(path))
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["theta_deg", "rho", "hit_x", "hit_y", "arc_id", "extended_arc_id"]
    assert len(rows) == 361
    tagged = [r for r in rows[1:] if int(r[4]) >= 0]
    assert len(tagged) == len(arcs.arcs[0])
