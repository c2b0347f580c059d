import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import LineString, Point
from shapely.ops import unary_union

from ridcoverage.geometry import (
    CoverageGeometry,
    Disk,
    Point2,
    chord_coverage_proportion,
    chord_from_angles,
    concentric_coverage_proportion,
    ell_squared_ude,
    merge_intervals,
    polyline_coverage_proportion,
    polyline_covered_length,
    segment_disk_intersection_length,
    segment_disk_parameters,
    union_length,
)

angles = st.floats(0.0, 2 * math.pi, allow_nan=False)
rhos = st.floats(0.01, 1.0)


def test_point_rejects_non_finite():
    with pytest.raises(ValueError):
        Point2.of((float("nan"), 0.0))
    assert Point2.of([1, 2]) == (1.0, 2.0)


@pytest.mark.parametrize("rc,re", [(0.0, 1.0), (-1.0, 1.0), (2.0, 1.0), (1.0, float("inf"))])
def test_geometry_validation(rc, re):
    with pytest.raises(ValueError):
        CoverageGeometry(rc, re)


def test_disk_validation():
    with pytest.raises(ValueError):
        Disk((0, 0), 0.0)


@given(angles, angles)
def test_chord_endpoints_on_environment(a, b):
    g = CoverageGeometry(1.0, 3.0, (2.0, -1.0))
    ch = chord_from_angles(a, b, g)
    for p in (ch.endpoint_a, ch.endpoint_b):
        assert math.hypot(p.x - 2.0, p.y + 1.0) == pytest.approx(3.0, abs=1e-12)
    assert ch.ell == pytest.approx(3.0 * abs(math.cos((a - b) / 2)), abs=1e-12)


@given(angles)
def test_ell_squared_matches_construction(beta):
    g = CoverageGeometry(0.5, 2.0)
    ch = chord_from_angles(0.0, beta, g)
    assert ch.ell**2 == pytest.approx(ell_squared_ude(beta, 2.0), abs=1e-12)


def test_degenerate_chord_counts_zero():
    g = CoverageGeometry(0.9, 1.0)
    ch = chord_from_angles(1.0, 1.0 + 2 * math.pi, g)
    assert ch.degenerate and ch.length == 0.0
    assert chord_coverage_proportion(ch, g) == 0.0


def test_hand_values():
    g = CoverageGeometry(0.5, 1.0)
    # diameter: covered fraction is exactly rho
    assert concentric_coverage_proportion(0.0, g) == pytest.approx(0.5)
    assert concentric_coverage_proportion(0.5, g) == 0.0
    assert concentric_coverage_proportion(0.7, g) == 0.0
    # 3-4-5: chord at 0.3 has half-length 0.4 in r_c, sqrt(0.91) in r_e
    assert concentric_coverage_proportion(0.3, g) == pytest.approx(0.4 / math.sqrt(0.91), rel=1e-14)
    full = CoverageGeometry(1.0, 1.0)
    assert np.all(concentric_coverage_proportion(np.array([0.0, 0.5, 1.0]), full) == 1.0)


def test_ell_out_of_range():
    with pytest.raises(ValueError):
        concentric_coverage_proportion(1.5, CoverageGeometry(0.5, 1.0))


@settings(max_examples=300)
@given(angles, angles, rhos)
def test_closed_form_matches_segment_intersection(a, b, rho):
    g = CoverageGeometry(rho, 1.0)
    ch = chord_from_angles(a, b, g)
    if ch.length < 1e-6:
        return
    general = segment_disk_intersection_length(ch.endpoint_a, ch.endpoint_b, Disk((0, 0), rho)) / ch.length
    assert chord_coverage_proportion(ch, g) == pytest.approx(general, abs=1e-9)


@settings(max_examples=100)
@given(angles, angles, st.floats(0.1, 0.9))
def test_closed_form_matches_shapely(a, b, rho):
    g = CoverageGeometry(rho, 1.0)
    ch = chord_from_angles(a, b, g)
    if ch.length < 1e-3:
        return
    line = LineString([ch.endpoint_a, ch.endpoint_b])
    disk = Point(0, 0).buffer(rho, quad_segs=512)
    ref = line.intersection(disk).length / line.length
    assert chord_coverage_proportion(ch, g) == pytest.approx(ref, abs=2e-4)


def test_segment_disk_cases():
    c = [[0.0, 0.0]]
    # tangent line touches at one point: empty
    t0, t1 = segment_disk_parameters((-2, 1), (2, 1), c, [1.0])
    assert t0[0] == t1[0]
    # fully inside
    t0, t1 = segment_disk_parameters((-0.1, 0), (0.2, 0), c, [1.0])
    assert (t0[0], t1[0]) == (0.0, 1.0)
    # misses
    t0, t1 = segment_disk_parameters((3, 3), (4, 3), c, [1.0])
    assert t0[0] == t1[0]
    # stops before the disk
    t0, t1 = segment_disk_parameters((-5, 0), (-2, 0), c, [1.0])
    assert t0[0] == t1[0]
    # crosses: [-2, 2] through unit disk -> t in [0.25, 0.75]
    t0, t1 = segment_disk_parameters((-2, 0), (2, 0), c, [1.0])
    assert t0[0] == pytest.approx(0.25) and t1[0] == pytest.approx(0.75)
    assert segment_disk_intersection_length((-2, 0), (2, 0), Disk((0, 0), 1.0)) == pytest.approx(2.0)


def test_stable_roots_far_from_origin():
    a = np.array([1e7, 1e7])
    t0, t1 = segment_disk_parameters(a + (-2, 0), a + (2, 0), [a], [1.0])
    assert t1[0] - t0[0] == pytest.approx(0.5, rel=1e-8)


def test_merge_intervals():
    assert merge_intervals([0.5, 0.0, 0.9], [0.7, 0.2, 0.95]) == [(0.0, 0.2), (0.5, 0.7), (0.9, 0.95)]
    assert merge_intervals([0.0, 0.2], [0.2, 0.4]) == [(0.0, 0.4)]
    assert merge_intervals([0.0, 0.3], [0.5, 0.4]) == [(0.0, 0.5)]
    assert merge_intervals([0.1], [0.1]) == []


intervals = st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=0, max_size=12)


@given(intervals)
def test_union_length_matches_merge_and_grid(pairs):
    s = [min(p) for p in pairs]
    e = [max(p) for p in pairs]
    merged = merge_intervals(s, e)
    assert union_length(s, e) == pytest.approx(sum(b - a for a, b in merged), abs=1e-12)
    # independent oracle: midpoint rule on a fine grid
    x = (np.arange(20000) + 0.5) / 20000
    inside = np.zeros_like(x, dtype=bool)
    for a, b in zip(s, e):
        inside |= (x >= a) & (x <= b)
    assert union_length(s, e) == pytest.approx(inside.mean(), abs=2 * len(pairs) / 20000 + 1e-12)


def _shapely_fraction(poly, centers, radii):
    line = LineString(poly)
    cover = unary_union([Point(c).buffer(r, quad_segs=256) for c, r in zip(centers, radii)])
    return line.intersection(cover).length / line.length


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=2, max_size=6),
    st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10), st.floats(0.5, 6)), min_size=0, max_size=6),
)
def test_polyline_coverage_matches_shapely(poly, disks):
    poly = np.array(poly)
    if np.hypot(*np.diff(poly, axis=0).T).sum() < 1e-3:
        return
    centers = np.array([d[:2] for d in disks]).reshape(-1, 2)
    radii = np.array([d[2] for d in disks])
    got = polyline_coverage_proportion(poly, (centers, radii))
    ref = _shapely_fraction(poly, centers, radii) if disks else 0.0
    assert got == pytest.approx(ref, abs=1e-3)


def test_polyline_overlap_counted_once():
    disks = [Disk((0, 0), 1.0), Disk((0.5, 0), 1.0), Disk((0, 0), 1.0)]
    covered, total = polyline_covered_length([(-3, 0), (3, 0)], disks)
    assert total == 6.0
    assert covered == pytest.approx(2.5)


def test_polyline_inclusion_monotone():
    rng = np.random.default_rng(3)
    poly = rng.uniform(-10, 10, (8, 2))
    centers = rng.uniform(-10, 10, (12, 2))
    prev = 0.0
    for k in range(13):
        p = polyline_coverage_proportion(poly, (centers[:k], 2.0))
        assert p >= prev - 1e-12
        prev = p


def test_polyline_errors_and_edges():
    with pytest.raises(ValueError):
        polyline_coverage_proportion([(1, 1), (1, 1)], [])
    with pytest.raises(ValueError):
        polyline_coverage_proportion([(1, 1)], [])
    assert polyline_coverage_proportion([(0, 0), (1, 0)], []) == 0.0
    assert polyline_coverage_proportion([(0, 0), (1, 0), (1, 0), (2, 0)], [Disk((1, 0), 5)]) == 1.0
