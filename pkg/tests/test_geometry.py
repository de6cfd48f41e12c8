"""Core hyperboloid geometry: forms, distances, geodesics, exp/log."""

import numpy as np
import pytest

from hypequil import (GeodesicSegment, InputError, InvariantViolation,
                      TangentVec, dist, exp_map, geodesic_point, hpoint,
                      log_map, minkowski_form, origin, project_to_hyperboloid)
from hypequil.geometry import exp_map_raw, log_map_raw, sheet_residual
from hypequil.regions import Ball, sample

# independent high-precision oracle values (mpmath, 40 digits)
ACOSH_COSH1_SQ = 1.5133740065965039598   # acosh(cosh(1)^2)
COSH_HALF = 1.1276259652063807852
SINH_HALF = 0.52109530549374736162
INV_SQRT3 = 0.57735026918962576451


def p(*coords):
    return hpoint(list(coords))


def test_minkowski_form_basics():
    assert minkowski_form([1, 0, 0], [1, 0, 0]) == -1.0
    assert minkowski_form([0, 1, 0], [0, 0, 1]) == 0.0
    v = [np.cosh(1), np.sinh(1), 0.0]
    assert minkowski_form([1, 0, 0], v) == pytest.approx(-np.cosh(1), abs=1e-15)


def test_minkowski_form_symmetry_and_dimension_error():
    rng = np.random.default_rng(0)
    u, v = rng.standard_normal(4), rng.standard_normal(4)
    assert minkowski_form(u, v) == pytest.approx(minkowski_form(v, u), abs=1e-15)
    with pytest.raises(InputError):
        minkowski_form([1, 0], [1, 0, 0])


def test_dist_identity_and_unit_geodesic():
    o = origin(2)
    assert dist(o, o) == 0.0
    q = p(np.cosh(1), np.sinh(1), 0)
    assert dist(o, q) == pytest.approx(1.0, abs=1e-14)
    assert dist(q, o) == dist(o, q)


def test_dist_closed_form_oracle():
    x = p(np.cosh(1), np.sinh(1), 0)
    y = p(np.cosh(1), 0, np.sinh(1))
    assert dist(x, y) == pytest.approx(ACOSH_COSH1_SQ, abs=1e-12)


def test_dist_rejects_off_sheet_points():
    with pytest.raises(InvariantViolation):
        dist(np.array([1.5, 0.0, 0.0]), origin(2))


def test_geodesic_endpoints_and_midpoint():
    x = origin(2)
    y = p(np.cosh(1), np.sinh(1), 0)
    assert np.allclose(geodesic_point(x, y, 1.0), x, atol=1e-15)
    assert np.allclose(geodesic_point(x, y, 0.0), y, atol=1e-15)
    mid = geodesic_point(x, y, 0.5)
    assert mid == pytest.approx([COSH_HALF, SINH_HALF, 0.0], abs=1e-14)
    # the same point measured by the distance oracle
    assert dist(x, mid) == pytest.approx(0.5, abs=1e-12)
    assert dist(y, mid) == pytest.approx(0.5, abs=1e-12)


def test_geodesic_degenerate_and_bad_t():
    x = p(np.cosh(0.3), 0, np.sinh(0.3))
    assert np.allclose(geodesic_point(x, x, 0.7), x, atol=1e-15)
    with pytest.raises(InputError):
        geodesic_point(x, x, 1.2)


def test_geodesic_speed_consistency():
    rng = np.random.default_rng(7)
    ball = Ball(center=origin(2), radius=3.0)
    pts = sample(ball, 11, 40, 3.0)
    ts = [0.0, 0.25, 0.5, 0.75, 1.0]
    for i in range(0, 40, 2):
        x, y = pts[i], pts[i + 1]
        d = dist(x, y)
        zs = [geodesic_point(x, y, t) for t in ts]
        for a in range(len(ts)):
            for b in range(len(ts)):
                expect = abs(ts[a] - ts[b]) * d
                assert dist(zs[a], zs[b]) == pytest.approx(expect, abs=1e-9)


def test_segment_conventions():
    a = origin(2)
    b = p(np.cosh(2), np.sinh(2), 0)
    seg = GeodesicSegment(a=a, b=b)
    assert seg.length == pytest.approx(2.0, abs=1e-13)
    assert np.allclose(seg.point_at(1.0), a)
    assert np.allclose(seg.point_at(0.0), b)


def test_exp_map_axis_and_zero():
    o = origin(2)
    v = TangentVec(base=o, vec=np.array([0.0, 1.0, 0.0]))
    assert exp_map(v) == pytest.approx([np.cosh(1), np.sinh(1), 0.0], abs=1e-15)
    z = TangentVec(base=o, vec=np.zeros(3))
    assert np.allclose(exp_map(z), o)


def test_exp_map_norm_is_distance():
    rng = np.random.default_rng(3)
    o = origin(2)
    for _ in range(50):
        raw = rng.standard_normal(3)
        raw[0] = 0.0
        r = 4.0 * rng.random()
        nrm = np.linalg.norm(raw[1:])
        vec = raw * (r / nrm)
        y = exp_map(TangentVec(base=o, vec=vec))
        assert dist(o, y) == pytest.approx(r, rel=1e-12, abs=1e-12)


def test_exp_rejects_non_spacelike():
    q = p(np.cosh(1), np.sinh(1), 0)
    # a timelike ambient vector cannot be tangent anywhere
    with pytest.raises((InputError, InvariantViolation)):
        exp_map(TangentVec(base=q, vec=np.array([1.0, 0.0, 0.0])))


def test_log_map_basics_and_roundtrip():
    o = origin(2)
    y = p(np.cosh(1), np.sinh(1), 0)
    lv = log_map(o, y)
    assert lv.vec == pytest.approx([0.0, 1.0, 0.0], abs=1e-15)
    assert np.allclose(log_map(o, o).vec, 0.0)

    ball = Ball(center=o, radius=5.0)
    pts = sample(ball, 13, 200, 5.0)
    for i in range(0, 200, 2):
        x, y = np.ascontiguousarray(pts[i]), np.ascontiguousarray(pts[i + 1])
        v = log_map_raw(x, y)
        assert np.sqrt(minkowski_form(v, v)) == pytest.approx(dist(x, y),
                                                              rel=1e-10)
        back = exp_map_raw(x, v)
        assert np.max(np.abs(back - y)) < 1e-8 * max(1.0, y[0])


def test_project_to_hyperboloid():
    assert project_to_hyperboloid([2.0, 0, 0]) == pytest.approx([1, 0, 0])
    scaled = project_to_hyperboloid([2.0, 1.0, 0.0])
    assert scaled == pytest.approx([2 * INV_SQRT3, INV_SQRT3, 0.0], abs=1e-15)
    assert sheet_residual(scaled) < 1e-15
    # idempotent on valid points
    again = project_to_hyperboloid(scaled)
    assert np.array_equal(again, scaled)
    with pytest.raises(InputError):
        project_to_hyperboloid([0.5, 1.0, 0.0])   # spacelike
    with pytest.raises(InputError):
        project_to_hyperboloid([-2.0, 0.0, 0.0])  # past sheet


def test_hpoint_validation_and_immutability():
    q = hpoint([np.cosh(0.4), np.sinh(0.4), 0])
    with pytest.raises(ValueError):
        q[0] = 2.0
    with pytest.raises(InvariantViolation):
        hpoint([1.1, 0.0, 0.0])


def test_higher_dimension_support():
    o = origin(4)
    assert o.shape == (5,)
    v = np.zeros(5)
    v[2] = 2.0
    y = exp_map(TangentVec(base=o, vec=v))
    assert dist(o, y) == pytest.approx(2.0, abs=1e-13)
