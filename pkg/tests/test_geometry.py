import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvd.geometry import (INSIDE, ON, OUTSIDE, ConvexPolygon, GeometryError, circumcenter, clip_convex,
                          incircle, orient2d, polygon_area, segment_cross)

coord = st.floats(-100, 100, allow_nan=False, allow_infinity=False)
point = st.tuples(coord, coord)


def test_orient2d_examples():
    assert orient2d((0, 0), (1, 0), (0, 1)) == 1.0
    assert orient2d((0, 0), (1, 1), (2, 2)) == 0.0
    assert orient2d((0, 0), (0, 1), (1, 0)) == -1.0


@given(point, point, point)
def test_orient2d_antisymmetric(a, b, c):
    assert orient2d(a, b, c) == -orient2d(b, a, c)


def test_incircle_examples():
    a, b, c = (0, 0), (1, 0), (0, 1)
    assert incircle(a, b, c, (0.25, 0.25)) == INSIDE
    assert incircle(a, b, c, (1, 1)) == ON
    assert incircle(a, b, c, (2, 2)) == OUTSIDE


def test_incircle_rejects_bad_triangles():
    with pytest.raises(GeometryError):
        incircle((0, 0), (1, 1), (2, 2), (0, 1))
    with pytest.raises(GeometryError):
        incircle((0, 0), (0, 1), (1, 0), (0.2, 0.2))


def test_circumcenter_examples():
    np.testing.assert_allclose(circumcenter((0, 0), (1, 0), (0, 1)), (0.5, 0.5), atol=1e-15)
    np.testing.assert_allclose(circumcenter((0, 0), (2, 0), (1, math.sqrt(3))), (1, 1 / math.sqrt(3)), atol=1e-15)
    pts = np.array([(0, 0), (4, 0), (1, 1)], dtype=float)
    cc = circumcenter(*pts)
    d = np.hypot(*(pts - cc).T)
    assert np.ptp(d) < 1e-12 * d.max()


def test_circumcenter_degenerate():
    with pytest.raises(GeometryError, match="degenerate triangle"):
        circumcenter((0, 0), (1, 1), (3, 3))


def test_circumcenter_equidistance_random():
    rng = np.random.default_rng(7)
    worst = 0.0
    count = 0
    while count < 10_000:
        p = rng.uniform(-1, 1, size=(3, 2)) * 10 ** rng.uniform(-2, 2)
        e = np.hypot(*(np.roll(p, -1, axis=0) - p).T)
        area = abs(orient2d(*p)) / 2
        if area == 0:
            continue
        # longest edge over the altitude onto it
        aspect = e.max() ** 2 / (2 * area)
        if aspect > 1e3:
            continue
        cc = circumcenter(*p)
        d = np.hypot(*(p - cc).T)
        scale = np.abs(p).max()
        worst = max(worst, np.ptp(d) / scale)
        count += 1
    assert worst <= 1e-12


def test_polygon_validation():
    with pytest.raises(GeometryError):
        ConvexPolygon([(0, 0), (1, 0)])
    with pytest.raises(GeometryError):
        ConvexPolygon([(0, 0), (0, 1), (1, 1), (1, 0)])  # clockwise
    with pytest.raises(GeometryError):
        ConvexPolygon([(0, 0), (1, 0), (0.5, 0.1), (1, 1), (0, 1)])  # reflex vertex
    with pytest.raises(GeometryError):
        ConvexPolygon([(0, 0), (1, 0), (1, 0), (0, 1)])


def test_polygon_area_examples():
    assert polygon_area(ConvexPolygon.unit_square()) == 1.0
    assert polygon_area(ConvexPolygon([(0, 0), (1, 0), (0, 1)])) == 0.5
    ang = np.arange(6) * np.pi / 3
    hexagon = ConvexPolygon(np.column_stack([np.cos(ang), np.sin(ang)]))
    assert polygon_area(hexagon) == pytest.approx(3 * math.sqrt(3) / 2, rel=1e-14)


def test_clip_examples():
    sq = ConvexPolygon.unit_square()
    half = clip_convex(sq, ((1.0, 0.0), 0.5))
    assert polygon_area(half) == pytest.approx(0.5, rel=1e-15)
    np.testing.assert_allclose(half.vertices.min(axis=0), (0, 0))
    np.testing.assert_allclose(half.vertices.max(axis=0), (0.5, 1))
    same = clip_convex(sq, ((1.0, 0.0), 2.0))
    np.testing.assert_array_equal(same.vertices, sq.vertices)
    assert clip_convex(sq, ((1.0, 0.0), -1.0)) is None


def test_clip_emits_cut_vertices_once():
    sq = ConvexPolygon.unit_square()
    out = clip_convex(sq, ((1.0, 1.0), 1.0))  # cut exactly through two corners
    assert len(out) == 3
    assert polygon_area(out) == pytest.approx(0.5)


@settings(max_examples=200)
@given(st.floats(0, 2 * math.pi), st.floats(-1.5, 1.5))
def test_clip_complementary_halfplanes_partition(theta, offset):
    ang = np.arange(6) * np.pi / 3
    poly = ConvexPolygon(np.column_stack([np.cos(ang), np.sin(ang)]))
    n = np.array([math.cos(theta), math.sin(theta)])
    parts = [clip_convex(poly, (n, offset)), clip_convex(poly, (-n, -offset))]
    areas = [0.0 if p is None else polygon_area(p) for p in parts]
    for a in areas:
        assert a <= poly.area * (1 + 1e-12)
    assert sum(areas) == pytest.approx(poly.area, rel=1e-12)
    for p in parts:
        if p is not None:
            v = p.vertices
            turns = [orient2d(v[i - 1], v[i], v[(i + 1) % len(v)]) for i in range(len(v))]
            assert min(turns) > 0


def test_segment_cross_examples():
    np.testing.assert_array_equal(segment_cross((0, -1), (0, 1), (-1, 0), (1, 0)), (0, 0))
    assert segment_cross((0, 0), (1, 0), (0, 1), (1, 1)) is None
    assert segment_cross((0, 0), (1, 1), (1, 0), (2, 1)) is None


def test_polygon_queries():
    sq = ConvexPolygon.unit_square()
    assert sq.contains((0.5, 0.5))
    assert sq.contains((1.0, 0.3))
    assert not sq.contains((1.1, 0.3))
    assert sq.on_boundary((1.0, 0.3))
    assert not sq.on_boundary((0.5, 0.5))
    assert sq.distance_to_boundary((0.25, 0.5)) == pytest.approx(0.25)
    assert sq.diameter == pytest.approx(math.sqrt(2))
    with pytest.raises((ValueError, TypeError)):
        sq.vertices[0, 0] = 3.0
