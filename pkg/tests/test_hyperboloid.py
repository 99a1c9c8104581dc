import math

import numpy as np
import pytest

from hypdiam import hyperboloid as hb
from hypdiam.errors import InputRangeError
from hypdiam.hyperboloid import (
    ORIGIN,
    GeodesicSegment,
    Point,
    distance,
    distance_point_to_segment,
    geodesic_through,
    reflection_in_geodesic,
    rotation_about_origin,
    translation_along_x,
)

import _oracles as orc


def random_point(rng, rmax=3.0):
    r = rng.uniform(0.0, rmax)
    th = rng.uniform(0.0, 2.0 * math.pi)
    return Point(
        np.array([math.cosh(r), math.sinh(r) * math.cos(th), math.sinh(r) * math.sin(th)])
    )


def test_distance_identity():
    assert distance(ORIGIN, ORIGIN) == 0.0


def test_distance_axis_translation():
    p = Point(np.array([math.cosh(1.0), math.sinh(1.0), 0.0]))
    assert distance(ORIGIN, p) == pytest.approx(1.0, abs=1e-12)


def test_distance_symmetric_and_zero_iff_equal():
    rng = np.random.default_rng(5)
    for _ in range(50):
        p, q = random_point(rng), random_point(rng)
        assert distance(p, q) == pytest.approx(distance(q, p), abs=1e-10)
        # arccosh near 1 resolves no finer than x0*sqrt(2 eps)
        assert distance(p, p) <= 1e-6


def test_reflection_involution_and_det():
    n = np.array([0.3, math.sqrt(1.09), 0.0])
    n = hb.normalize_spacelike(n)
    r = reflection_in_geodesic(n)
    assert np.abs(r.m @ r.m - np.eye(3)).max() < 1e-12
    assert r.det == pytest.approx(-1.0, abs=1e-12)


def test_reflection_fixes_carrier():
    n = np.array([0.0, 0.0, 1.0])
    r = reflection_in_geodesic(n)
    p = Point(np.array([math.cosh(2.0), math.sinh(2.0), 0.0]))
    assert distance(r.apply(p), p) < 1e-12


def test_reflection_rejects_non_unit_carrier():
    with pytest.raises(InputRangeError):
        reflection_in_geodesic(np.array([0.0, 0.0, 2.0]))


def test_reflection_doubles_axis_distance():
    # d(p, R p) = 2 d(p, axis); the foot is found by dense sampling
    rng = np.random.default_rng(11)
    for _ in range(25):
        n = hb.normalize_spacelike(
            np.array([rng.uniform(-0.5, 0.5), 1.0 + rng.uniform(0, 1), rng.uniform(-1, 1)])
        )
        r = reflection_in_geodesic(n)
        p = random_point(rng)
        _, dfoot = orc.perpendicular_foot_numeric(p.vec, n, samples=200001, span=8.0)
        assert distance(p, r.apply(p)) == pytest.approx(2.0 * dfoot, abs=1e-7)


def test_segment_distance_point_on_segment():
    a = Point(np.array([1.0, 0.0, 0.0]))
    b = Point(np.array([math.cosh(2.0), math.sinh(2.0), 0.0]))
    seg = GeodesicSegment(a, b)
    mid = Point(np.array([math.cosh(1.0), math.sinh(1.0), 0.0]))
    assert distance_point_to_segment(mid, seg) < 1e-7


def test_segment_distance_perpendicular_foot():
    a = Point(np.array([math.cosh(1.0), -math.sinh(1.0), 0.0]))
    b = Point(np.array([math.cosh(2.0), math.sinh(2.0), 0.0]))
    seg = GeodesicSegment(a, b)
    c = 0.8
    p = Point(np.array([math.cosh(c), 0.0, math.sinh(c)]))
    assert distance_point_to_segment(p, seg) == pytest.approx(c, abs=1e-10)


def test_segment_distance_far_short_segment_vs_sampling():
    rng = np.random.default_rng(3)
    t1 = translation_along_x(1.5)
    for _ in range(10):
        a0 = Point(np.array([math.cosh(0.3), math.sinh(0.3), 0.0]))
        b0 = Point(np.array([math.cosh(0.5), math.sinh(0.5), 0.0]))
        rot = rotation_about_origin(rng.uniform(0, 2 * math.pi))
        a, b = rot.apply(t1.apply(a0)), rot.apply(t1.apply(b0))
        seg = GeodesicSegment(a, b)
        p = random_point(rng, rmax=2.0)
        # dense sampling along the segment
        ts = np.linspace(0.0, 1.0, 10_000)
        d_ab = distance(a, b)
        u = (b.vec - math.cosh(d_ab) * a.vec) / math.sinh(d_ab)
        pts = (
            np.cosh(ts * d_ab)[:, None] * a.vec[None, :]
            + np.sinh(ts * d_ab)[:, None] * u[None, :]
        )
        dmin = float(
            np.min(np.arccosh(np.maximum(hb.lorentz_dot(pts, p.vec[None, :]), 1.0)))
        )
        assert distance_point_to_segment(p, seg) == pytest.approx(dmin, abs=1e-6)


def test_segment_degenerate_endpoints():
    a = Point(np.array([math.cosh(1.0), math.sinh(1.0), 0.0]))
    seg = GeodesicSegment(a, a, carrier=np.array([0.0, 0.0, 1.0]))
    p = Point(np.array([1.0, 0.0, 0.0]))
    assert distance_point_to_segment(p, seg) == pytest.approx(1.0, abs=1e-10)


def test_isometry_preserves_distance():
    rng = np.random.default_rng(17)
    for _ in range(100):
        m = (
            rotation_about_origin(rng.uniform(0, 2 * math.pi))
            @ translation_along_x(rng.uniform(-2, 2))
            @ rotation_about_origin(rng.uniform(0, 2 * math.pi))
        )
        p, q = random_point(rng), random_point(rng)
        assert abs(distance(m.apply(p), m.apply(q)) - distance(p, q)) <= 1e-8


def test_two_reflections_in_crossing_geodesics_rotate():
    # carriers meeting at a point compose to a rotation fixing it
    p = Point(np.array([math.cosh(0.7), math.sinh(0.7), 0.0]))
    q1 = Point(np.array([math.cosh(1.5), math.sinh(1.5) * math.cos(0.4), math.sinh(1.5) * math.sin(0.4)]))
    q2 = Point(np.array([math.cosh(1.5), math.sinh(1.5) * math.cos(2.1), math.sinh(1.5) * math.sin(2.1)]))
    r1 = reflection_in_geodesic(geodesic_through(p, q1))
    r2 = reflection_in_geodesic(geodesic_through(p, q2))
    comp = r2 @ r1
    assert np.linalg.det(comp.m) == pytest.approx(1.0, abs=1e-10)
    assert distance(comp.apply(p), p) <= 1e-8


def test_triangle_inequality_fuzz():
    rng = np.random.default_rng(23)
    for _ in range(200):
        p, q, r = (random_point(rng) for _ in range(3))
        assert distance(p, r) <= distance(p, q) + distance(q, r) + 1e-8


def test_renormalization_drift_bounded():
    hexa = __import__("conftest").hexagon(6.0)
    p = np.array([math.cosh(1.1), math.sinh(1.1), 0.0])
    worst = 0.0
    for i in range(10_000):
        m = hb._to_origin(p) if i % 4 == 3 else hexa.reflection_mats[i % 3]
        p = hb.normalize_point(m @ p)
        worst = max(worst, abs(hb.lorentz_dot(p, p) - 1.0))
    assert worst < 1e-7


def test_point_invariant_enforced():
    with pytest.raises(InputRangeError):
        Point(np.array([0.5, 0.0, 0.0]))
    with pytest.raises(InputRangeError):
        Point(np.array([1.0, 1.0, 0.0]))


def test_translation_cap():
    with pytest.raises(InputRangeError):
        translation_along_x(45.0)
