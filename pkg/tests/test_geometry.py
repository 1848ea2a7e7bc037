import math

import numpy as np
import pytest

from mapmotion.errors import AntimeridianError, EmptyInputError, InvalidGeometryError
from mapmotion.geometry import (
    area_km2,
    bearing_deg,
    contains_point,
    difference,
    extent,
    haversine_km,
    morph,
    point_along,
    resample_ring,
    ring_correspondence,
    union,
)
from mapmotion.model import GeoPoint, GeoShape, ShapeKind

from conftest import square
from oracles import (
    hausdorff_deg,
    law_of_cosines_km,
    mc_area_km2,
    mc_centroid,
    points_in_shape,
    random_convex_polygon,
    sample_interior_points,
    spherical_quad_area_km2,
)

LONDON = GeoPoint(lat=51.5074, lon=-0.1278)
TORONTO = GeoPoint(lat=43.6532, lon=-79.3832)


# ---------------------------------------------------------------- haversine


def test_haversine_zero_iff_same_point():
    assert haversine_km(LONDON, LONDON) == 0.0
    assert haversine_km(LONDON, TORONTO) > 0.0


def test_haversine_half_circumference():
    # analytic great-circle oracle: pi * R
    expected = math.pi * 6371.0088
    got = haversine_km(GeoPoint(lat=0, lon=0), GeoPoint(lat=0, lon=180))
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(20015.1, abs=0.1)


def test_haversine_matches_law_of_cosines():
    # second-formula oracle, 0.1% tolerance
    oracle = law_of_cosines_km(LONDON, TORONTO)
    assert haversine_km(LONDON, TORONTO) == pytest.approx(oracle, rel=1e-3)


def test_haversine_symmetric():
    assert haversine_km(LONDON, TORONTO) == pytest.approx(haversine_km(TORONTO, LONDON), rel=1e-15)


# ---------------------------------------------------------------- area


def test_area_degenerate_ring_is_zero():
    shape = GeoShape(kind="polygon", coordinates=[[(5, 5), (5, 5), (5, 5), (5, 5)]])
    assert area_km2(shape) == 0.0


def test_area_equator_degree_square():
    # analytic spherical quadrilateral oracle: ~12364 km^2
    oracle = spherical_quad_area_km2(0, 1, 0, 1)
    assert oracle == pytest.approx(12364, abs=5)
    assert area_km2(square(0, 0)) == pytest.approx(oracle, rel=5e-3)


def test_area_orientation_invariant():
    s = square(10, 20)
    reversed_ring = tuple(reversed(s.rings[0]))
    r = GeoShape(kind="polygon", coordinates=[reversed_ring])
    assert area_km2(s) == pytest.approx(area_km2(r), rel=1e-12)


def test_area_hole_subtracts():
    outer = [(0, 0), (0, 3), (3, 3), (3, 0)]
    hole = [(1, 1), (1, 2), (2, 2), (2, 1)]
    with_hole = GeoShape.from_polygon([outer, hole])
    assert area_km2(with_hole) == pytest.approx(area_km2(square(0, 0, 3)) - area_km2(square(1, 1)), rel=1e-6)


def test_area_open_ring_rejected():
    shape = GeoShape.model_construct(
        kind=ShapeKind.polygon,
        coordinates=((GeoPoint(lat=0, lon=0), GeoPoint(lat=0, lon=1), GeoPoint(lat=1, lon=1), GeoPoint(lat=1, lon=0)),),
        properties={},
    )
    with pytest.raises(InvalidGeometryError):
        area_km2(shape)


def test_area_matches_monte_carlo_for_random_polygons():
    rng = np.random.default_rng(42)
    for i in range(5):
        shape = random_convex_polygon(rng)
        oracle = mc_area_km2([shape], "single", n=400_000, seed=i)
        assert area_km2(shape) == pytest.approx(oracle, rel=0.01)


# ---------------------------------------------------------------- union / difference


def test_union_adjacent_squares_merges():
    a = square(0, 0)
    b = square(0, 1)
    merged = union([a, b])
    assert merged.kind is ShapeKind.polygon
    assert area_km2(merged) == pytest.approx(mc_area_km2([a, b], "union", n=400_000), rel=0.01)


def test_union_overlapping_squares():
    a = square(0, 0)
    b = GeoShape.from_polygon([[(0, 0.5), (0, 1.5), (1, 1.5), (1, 0.5)]])
    merged = union([a, b])
    assert merged.kind is ShapeKind.polygon
    # overlap is 1x0.5 so the union covers 1.5 square degrees
    assert area_km2(merged) == pytest.approx(1.5 * area_km2(a), rel=5e-3)


def test_union_identity():
    a = square(5, 5)
    assert area_km2(union([a])) == pytest.approx(area_km2(a), rel=1e-9)


def test_union_idempotent_and_commutative():
    a = square(0, 0)
    b = square(0.5, 0.5)
    assert area_km2(union([a, a])) == pytest.approx(area_km2(a), rel=1e-9)
    assert area_km2(union([a, b])) == pytest.approx(area_km2(union([b, a])), rel=1e-9)


def test_union_empty_input_rejected():
    with pytest.raises(EmptyInputError):
        union([])


def test_union_containment_sampling():
    rng = np.random.default_rng(7)
    a = random_convex_polygon(rng)
    # offset b so it overlaps a
    b = random_convex_polygon(rng)
    merged = union([a, b])
    for src in (a, b):
        for p in sample_interior_points(src, 100, seed=3):
            assert contains_point(merged, p)


def test_difference_rectangle():
    big = GeoShape.from_polygon([[(0, 0), (0, 2), (1, 2), (1, 0)]])
    right = GeoShape.from_polygon([[(0, 1), (0, 2), (1, 2), (1, 1)]])
    left = difference(big, right)
    assert area_km2(left) == pytest.approx(area_km2(square(0, 0)), rel=5e-3)
    lon = np.array([0.5, 1.5])
    lat = np.array([0.5, 0.5])
    inside = points_in_shape(lon, lat, left)
    assert inside[0] and not inside[1]


def test_difference_self_is_empty():
    a = square(3, 3)
    out = difference(a, a)
    assert out.is_empty
    assert area_km2(out) == 0.0


def test_difference_subset_of_minuend():
    rng = np.random.default_rng(11)
    a = random_convex_polygon(rng)
    mask = random_convex_polygon(rng)
    out = difference(a, mask)
    if out.is_empty:
        return
    for p in sample_interior_points(out, 200, seed=5, margin_deg=1e-7):
        lon = np.array([p.lon])
        lat = np.array([p.lat])
        assert points_in_shape(lon, lat, a)[0]
        assert not points_in_shape(lon, lat, mask)[0]


def test_antimeridian_rejected():
    crossing = GeoShape.from_polygon([[(0, 179), (0, -179), (1, -179), (1, 179)]])
    with pytest.raises(AntimeridianError):
        union([crossing])
    with pytest.raises(AntimeridianError):
        area_km2(crossing)


# ---------------------------------------------------------------- morph


def test_morph_endpoints_match_resampled_inputs():
    a = square(0, 0)
    b = GeoShape.from_polygon([[(0, 2), (0, 4), (1.5, 4), (2, 2.5)]])
    m0 = morph(a, b, 0.0)
    m1 = morph(a, b, 1.0)
    ra = resample_ring(a, 64)
    rb = resample_ring(b, 64)
    m0_arr = np.array([[p.lat, p.lon] for p in m0.rings[0][:-1]])
    m1_arr = np.array([[p.lat, p.lon] for p in m1.rings[0][:-1]])
    assert hausdorff_deg(m0_arr, ra) < 1e-6
    assert hausdorff_deg(m1_arr, rb) < 1e-6


def test_morph_translation_midpoint():
    a = square(0, 0)
    b = square(0, 1)  # same square shifted +1 degree lon
    mid = morph(a, b, 0.5)
    expected = resample_ring(square(0, 0.5), 64)
    got = np.array([[p.lat, p.lon] for p in mid.rings[0][:-1]])
    assert hausdorff_deg(got, expected) < 1e-9


def test_morph_intermediate_rings_closed():
    a = square(0, 0)
    b = square(2, 2, 2)
    for f in (0.25, 0.5, 0.75):
        shape = morph(a, b, f)
        ring = shape.rings[0]
        assert ring[0] == ring[-1]
        assert len(ring) >= 65


def test_morph_growth_area_monotonic():
    # state polygon morphing into the merged two-state boundary: area grows
    north = GeoShape.from_polygon([[(45.93, -104.05), (45.93, -96.55), (49.0, -96.55), (49.0, -104.05)]])
    south = GeoShape.from_polygon([[(42.48, -104.05), (42.48, -96.55), (45.93, -96.55), (45.93, -104.05)]])
    merged = union([north, south])
    areas = [area_km2(morph(north, merged, f)) for f in np.linspace(0, 1, 11)]
    for earlier, later in zip(areas[:-1], areas[1:]):
        assert later >= earlier - 1e-6


def test_morph_degenerate_ring_rejected():
    degenerate = GeoShape(kind="polygon", coordinates=[[(1, 1), (1, 1), (1, 1), (1, 1)]])
    with pytest.raises(InvalidGeometryError):
        morph(degenerate, square(0, 0), 0.5)


def test_morph_vertex_count_scales_with_input():
    rng = np.random.default_rng(3)
    ring = [(math.sin(t) * 2 + 10, math.cos(t) * 2 + 10) for t in np.linspace(0, 2 * math.pi, 100, endpoint=False)]
    big = GeoShape.from_polygon([ring])
    corr = ring_correspondence(big, square(0, 0))
    assert len(corr.source) == 100
    assert len(corr.source) == len(corr.target)


# ---------------------------------------------------------------- point_along


def test_point_along_equatorial_midpoint():
    path = GeoShape.from_path([(0, 0), (0, 1)])
    point, heading = point_along(path, 0.5)
    assert point.lat == pytest.approx(0.0, abs=1e-12)
    assert point.lon == pytest.approx(0.5, abs=1e-9)
    assert heading == pytest.approx(90.0, abs=1e-6)


def test_point_along_endpoints_exact():
    path = GeoShape.from_path([(10, 10), (11, 12), (13, 12.5)])
    p0, _ = point_along(path, 0.0)
    p1, _ = point_along(path, 1.0)
    assert p0 == path.path[0]
    assert p1 == path.path[-1]


def test_point_along_clamps():
    path = GeoShape.from_path([(0, 0), (0, 1)])
    assert point_along(path, -0.5)[0] == path.path[0]
    assert point_along(path, 1.5)[0] == path.path[-1]


def test_point_along_monotone_distance():
    path = GeoShape.from_path([(0, 0), (1, 1), (0.5, 2), (2, 3)])
    start = path.path[0]
    dists = []
    prev = 0.0
    for f in np.linspace(0, 1, 50):
        pos, _ = point_along(path, float(f))
        # cumulative walked arc-length is monotone in fraction
        dists.append(f * sum(haversine_km(a, b) for a, b in zip(path.path[:-1], path.path[1:])))
        assert dists[-1] >= prev - 1e-12
        prev = dists[-1]
        assert pos.lat is not None


def test_bearing_north_east():
    assert bearing_deg(GeoPoint(lat=0, lon=0), GeoPoint(lat=1, lon=0)) == pytest.approx(0.0, abs=1e-9)
    assert bearing_deg(GeoPoint(lat=0, lon=0), GeoPoint(lat=0, lon=1)) == pytest.approx(90.0, abs=1e-9)


# ---------------------------------------------------------------- extent


def test_extent_single_point():
    shape = GeoShape.from_point((5, 6))
    box, centroid = extent(shape)
    assert box.min == box.max == GeoPoint(lat=5, lon=6)
    assert centroid == GeoPoint(lat=5, lon=6)


def test_extent_unit_square_centroid():
    # area weighting on the sphere shifts the centroid off the midpoint by
    # O(size^2); 1e-4 degrees is far above that for a 1-degree square
    box, centroid = extent(square(0, 0))
    assert centroid.lat == pytest.approx(0.5, abs=1e-4)
    assert centroid.lon == pytest.approx(0.5, abs=1e-4)
    assert box.min == GeoPoint(lat=0, lon=0)
    assert box.max == GeoPoint(lat=1, lon=1)


def test_extent_l_shape_centroid_matches_monte_carlo():
    # L-shaped hexagon built from squares sharing edges
    l_shape = GeoShape.from_polygon([[(0, 0), (0, 1), (0.5, 1), (0.5, 0.5), (1, 0.5), (1, 0)]])
    _, centroid = extent(l_shape)
    oracle = mc_centroid(l_shape, n=1_000_000, seed=9)
    assert centroid.lat == pytest.approx(oracle.lat, abs=1e-3)
    assert centroid.lon == pytest.approx(oracle.lon, abs=1e-3)


def test_extent_empty_rejected():
    with pytest.raises(EmptyInputError):
        extent(GeoShape.empty())


def test_extent_line_arc_midpoint():
    path = GeoShape.from_path([(0, 0), (0, 2)])
    _, centroid = extent(path)
    assert centroid.lon == pytest.approx(1.0, abs=1e-9)
