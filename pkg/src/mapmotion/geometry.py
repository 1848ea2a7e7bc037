"""Coordinate math for the animation engine.

Polygon boolean operations (backing the researcher's boundary addition and
reduction), shape morphing for spatial transitions, path parameterization
for routes, and framing helpers for the camera.

Boolean operations run planar in lon/lat with snap-rounding (grid 1e-7
degrees, about 1 cm) so administrative boundaries fetched independently
merge along shared borders. Area and centroid are computed on a local
azimuthal equal-area projection about the shape's bbox center; shapes in
scope are sub-continental, so projection error is far below test
tolerances. Geodesic (ellipsoidal) precision and antimeridian-crossing
polygons are out of scope; the latter are rejected with a distinct error.

Everything here is a pure function over immutable inputs.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np
import shapely
from shapely.geometry import MultiPolygon as ShMultiPolygon
from shapely.geometry import Polygon as ShPolygon

from .errors import AntimeridianError, EmptyInputError, InvalidGeometryError
from .model import BoundingBox, GeoPoint, GeoShape, ShapeKind

EARTH_RADIUS_KM = 6371.0088
SNAP_GRID_DEG = 1e-7
MIN_MORPH_VERTICES = 64


# ---------------------------------------------------------------------------
# Distances and bearings
# ---------------------------------------------------------------------------


def haversine_km(p: GeoPoint, q: GeoPoint) -> float:
    """Great-circle distance on a sphere of radius 6371.0088 km."""
    lat1, lon1, lat2, lon2 = map(math.radians, (p.lat, p.lon, q.lat, q.lon))
    sin_lat = math.sin((lat2 - lat1) / 2.0)
    sin_lon = math.sin((lon2 - lon1) / 2.0)
    h = sin_lat * sin_lat + math.cos(lat1) * math.cos(lat2) * sin_lon * sin_lon
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def bearing_deg(p: GeoPoint, q: GeoPoint) -> float:
    """Initial (forward) bearing from p to q, degrees clockwise from north."""
    lat1, lon1, lat2, lon2 = map(math.radians, (p.lat, p.lon, q.lat, q.lon))
    dlon = lon2 - lon1
    x = math.sin(dlon) * math.cos(lat2)
    y = math.cos(lat1) * math.sin(lat2) - math.sin(lat1) * math.cos(lat2) * math.cos(dlon)
    return (math.degrees(math.atan2(x, y)) + 360.0) % 360.0


def path_length_km(points: Sequence[GeoPoint]) -> float:
    return sum(haversine_km(a, b) for a, b in zip(points[:-1], points[1:]))


def point_along(path: GeoShape, fraction: float) -> tuple[GeoPoint, float]:
    """Position at an arc-length fraction of a line, plus the forward
    bearing of the segment it falls on. Fractions outside [0, 1] clamp
    (the sequencer may overshoot by float noise)."""
    pts = path.path
    fraction = min(1.0, max(0.0, fraction))
    seg_lengths = [haversine_km(a, b) for a, b in zip(pts[:-1], pts[1:])]
    total = sum(seg_lengths)
    if total == 0.0:
        return pts[0], 0.0
    if fraction == 0.0:
        heading = next((bearing_deg(a, b) for a, b, d in zip(pts[:-1], pts[1:], seg_lengths) if d > 0), 0.0)
        return pts[0], heading
    if fraction == 1.0:
        heading = next(
            (bearing_deg(a, b) for a, b, d in reversed(list(zip(pts[:-1], pts[1:], seg_lengths))) if d > 0), 0.0
        )
        return pts[-1], heading

    target = fraction * total
    walked = 0.0
    for a, b, d in zip(pts[:-1], pts[1:], seg_lengths):
        if d > 0 and walked + d >= target:
            f = (target - walked) / d
            point = GeoPoint(lat=a.lat + (b.lat - a.lat) * f, lon=a.lon + (b.lon - a.lon) * f)
            return point, bearing_deg(a, b)
        walked += d
    return pts[-1], bearing_deg(pts[-2], pts[-1])


# ---------------------------------------------------------------------------
# Local equal-area projection
# ---------------------------------------------------------------------------


def _vertex_array(points: Iterable[GeoPoint]) -> np.ndarray:
    return np.array([[p.lat, p.lon] for p in points], dtype=float)


def _check_antimeridian(shape: GeoShape) -> None:
    if shape.kind is ShapeKind.point:
        return
    seqs: list[tuple[GeoPoint, ...]]
    if shape.kind is ShapeKind.line:
        seqs = [shape.path]
    else:
        seqs = [ring for poly in shape.polygons for ring in poly]
    for seq in seqs:
        for a, b in zip(seq[:-1], seq[1:]):
            if abs(a.lon - b.lon) > 180.0:
                raise AntimeridianError(
                    "shape crosses the antimeridian (segment spans more than 180 degrees of longitude)"
                )


def _laea_forward(latlon: np.ndarray, lat0: float, lon0: float) -> np.ndarray:
    """Lambert azimuthal equal-area projection to km about (lat0, lon0)."""
    lat = np.radians(latlon[:, 0])
    lon = np.radians(latlon[:, 1])
    lat0r = math.radians(lat0)
    lon0r = math.radians(lon0)
    dlon = lon - lon0r
    denom = 1.0 + math.sin(lat0r) * np.sin(lat) + math.cos(lat0r) * np.cos(lat) * np.cos(dlon)
    denom = np.maximum(denom, 1e-12)
    k = np.sqrt(2.0 / denom)
    x = EARTH_RADIUS_KM * k * np.cos(lat) * np.sin(dlon)
    y = EARTH_RADIUS_KM * k * (math.cos(lat0r) * np.sin(lat) - math.sin(lat0r) * np.cos(lat) * np.cos(dlon))
    return np.column_stack([x, y])


def _laea_inverse(xy: np.ndarray, lat0: float, lon0: float) -> np.ndarray:
    x = xy[:, 0] / EARTH_RADIUS_KM
    y = xy[:, 1] / EARTH_RADIUS_KM
    rho = np.sqrt(x * x + y * y)
    lat0r = math.radians(lat0)
    out = np.empty_like(xy)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = 2.0 * np.arcsin(np.minimum(1.0, rho / 2.0))
        lat = np.arcsin(np.where(rho > 0, np.cos(c) * math.sin(lat0r) + y * np.sin(c) * math.cos(lat0r) / rho, math.sin(lat0r)))
        lon = math.radians(lon0) + np.arctan2(
            x * np.sin(c), rho * math.cos(lat0r) * np.cos(c) - y * math.sin(lat0r) * np.sin(c)
        )
    mask = rho == 0
    lat[mask] = lat0r
    lon[mask] = math.radians(lon0)
    out[:, 0] = np.degrees(lat)
    out[:, 1] = np.degrees(lon)
    return out


def _shoelace(xy: np.ndarray) -> float:
    """Signed area of a closed ring given as (n, 2) xy."""
    x = xy[:, 0]
    y = xy[:, 1]
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


_DENSIFY_STEP_DEG = 0.05


def _densify_closed(latlon: np.ndarray, step: float = _DENSIFY_STEP_DEG) -> np.ndarray:
    """Insert intermediate vertices so no edge spans more than ``step``
    degrees. Boolean operations treat edges as straight in lon/lat, so
    area/centroid must integrate that same edge definition; projecting
    long edges as single chords would measure a subtly different shape."""
    pieces = []
    for a, b in zip(latlon[:-1], latlon[1:]):
        span = max(abs(b[0] - a[0]), abs(b[1] - a[1]))
        n = max(1, int(math.ceil(span / step)))
        ts = np.linspace(0.0, 1.0, n, endpoint=False)
        pieces.append(a[None, :] + ts[:, None] * (b - a)[None, :])
    pieces.append(latlon[-1:])
    return np.vstack(pieces)


def _bbox_center(shape: GeoShape) -> GeoPoint:
    verts = shape.vertices()
    lats = [p.lat for p in verts]
    lons = [p.lon for p in verts]
    return GeoPoint(lat=(min(lats) + max(lats)) / 2.0, lon=(min(lons) + max(lons)) / 2.0)


def _require_polygonal(shape: GeoShape, op: str) -> None:
    if shape.kind not in (ShapeKind.polygon, ShapeKind.multipolygon):
        raise InvalidGeometryError(f"{op} needs a polygon or multipolygon, got {shape.kind.value}")
    for poly in shape.polygons:
        for ring in poly:
            if len(ring) < 4 or ring[0] != ring[-1]:
                raise InvalidGeometryError(f"{op} received an open or degenerate ring")


def area_km2(shape: GeoShape) -> float:
    """Area in square kilometers; holes (rings after the first of each
    polygon, GeoJSON convention) subtract."""
    _require_polygonal(shape, "area")
    if shape.is_empty:
        return 0.0
    _check_antimeridian(shape)
    center = _bbox_center(shape)
    total = 0.0
    for poly in shape.polygons:
        for i, ring in enumerate(poly):
            xy = _laea_forward(_densify_closed(_vertex_array(ring)), center.lat, center.lon)
            a = abs(_shoelace(xy))
            total += a if i == 0 else -a
    return max(0.0, total)


def extent(shape: GeoShape) -> tuple[BoundingBox, GeoPoint]:
    """Bounding box over every vertex plus a centroid: area-weighted for
    polygons, arc-length midpoint for lines, identity for points."""
    verts = shape.vertices()
    if not verts:
        raise EmptyInputError("extent of an empty shape")
    _check_antimeridian(shape)
    lats = [p.lat for p in verts]
    lons = [p.lon for p in verts]
    box = BoundingBox(
        min=GeoPoint(lat=min(lats), lon=min(lons)), max=GeoPoint(lat=max(lats), lon=max(lons))
    )
    if shape.kind is ShapeKind.point:
        return box, shape.point
    if shape.kind is ShapeKind.line:
        midpoint, _ = point_along(shape, 0.5)
        return box, midpoint

    center = box.center
    weighted = np.zeros(2)
    total_area = 0.0
    for poly in shape.polygons:
        for i, ring in enumerate(poly):
            xy = _laea_forward(_densify_closed(_vertex_array(ring)), center.lat, center.lon)
            signed = _shoelace(xy)
            a = abs(signed)
            if a == 0.0:
                continue
            x = xy[:, 0]
            y = xy[:, 1]
            cross = x[:-1] * y[1:] - x[1:] * y[:-1]
            cx = float(np.sum((x[:-1] + x[1:]) * cross)) / (6.0 * signed)
            cy = float(np.sum((y[:-1] + y[1:]) * cross)) / (6.0 * signed)
            sign = 1.0 if i == 0 else -1.0
            weighted += sign * a * np.array([cx, cy])
            total_area += sign * a
    if total_area == 0.0:
        return box, center
    centroid_xy = (weighted / total_area).reshape(1, 2)
    latlon = _laea_inverse(centroid_xy, center.lat, center.lon)[0]
    return box, GeoPoint(lat=float(latlon[0]), lon=float(latlon[1]))


# ---------------------------------------------------------------------------
# Boolean operations (shapely/GEOS behind the GeoShape contract)
# ---------------------------------------------------------------------------


def _to_shapely(shape: GeoShape):
    polys = []
    for poly in shape.polygons:
        outer = [(p.lon, p.lat) for p in poly[0]]
        holes = [[(p.lon, p.lat) for p in ring] for ring in poly[1:]]
        polys.append(ShPolygon(outer, holes))
    if not polys:
        return ShMultiPolygon([])
    merged = polys[0] if len(polys) == 1 else ShMultiPolygon(polys)
    if not merged.is_valid:
        merged = shapely.make_valid(merged)
    return merged


def _from_shapely(geom) -> GeoShape:
    geom = shapely.make_valid(geom)
    polys = []
    if geom.is_empty:
        return GeoShape.empty()
    if geom.geom_type == "Polygon":
        parts = [geom]
    elif geom.geom_type == "MultiPolygon":
        parts = list(geom.geoms)
    elif geom.geom_type == "GeometryCollection":
        parts = [g for g in geom.geoms if g.geom_type in ("Polygon", "MultiPolygon")]
        parts = [p for g in parts for p in (g.geoms if g.geom_type == "MultiPolygon" else [g])]
    else:
        return GeoShape.empty()
    for part in parts:
        if part.is_empty or part.area == 0.0:
            continue
        rings = [[(pt[1], pt[0]) for pt in part.exterior.coords]]
        for interior in part.interiors:
            rings.append([(pt[1], pt[0]) for pt in interior.coords])
        polys.append(rings)
    if not polys:
        return GeoShape.empty()
    if len(polys) == 1:
        return GeoShape(kind=ShapeKind.polygon, coordinates=polys[0])
    return GeoShape(kind=ShapeKind.multipolygon, coordinates=polys)


def _snapped(shape: GeoShape, op: str):
    _require_polygonal(shape, op)
    _check_antimeridian(shape)
    try:
        return shapely.set_precision(_to_shapely(shape), SNAP_GRID_DEG)
    except shapely.errors.GEOSException as exc:  # pragma: no cover - GEOS internal failures
        raise InvalidGeometryError(f"{op}: invalid geometry ({exc})") from exc


def union(shapes: Sequence[GeoShape]) -> GeoShape:
    """Combine boundaries into a single boundary. Adjacent shapes sharing a
    border merge into one ring after snap-rounding."""
    if not shapes:
        raise EmptyInputError("union of zero shapes")
    geoms = [_snapped(s, "union") for s in shapes]
    merged = shapely.union_all(geoms)
    return _from_shapely(shapely.set_precision(merged, SNAP_GRID_DEG))


def difference(shape: GeoShape, mask: GeoShape) -> GeoShape:
    """Remove the masked region from the shape; the result may be empty."""
    base = _snapped(shape, "difference")
    cut = _snapped(mask, "difference mask")
    return _from_shapely(shapely.set_precision(shapely.difference(base, cut), SNAP_GRID_DEG))


def contains_point(shape: GeoShape, point: GeoPoint) -> bool:
    """Planar containment test (boundary counts as inside)."""
    geom = _to_shapely(shape)
    return bool(shapely.covers(geom, shapely.points(point.lon, point.lat)))


# ---------------------------------------------------------------------------
# Ring morphing
# ---------------------------------------------------------------------------


class RingCorrespondence:
    """Resampled source and target rings with the rotation offset that
    minimizes summed squared vertex distance. Both arrays are (n, 2)
    lat/lon of the *open* ring (closure vertex dropped), n >= 8."""

    __slots__ = ("source", "target", "offset")

    def __init__(self, source: np.ndarray, target: np.ndarray, offset: int):
        if len(source) != len(target):
            raise InvalidGeometryError("correspondence rings must have identical vertex counts")
        if len(source) < 8:
            raise InvalidGeometryError("correspondence rings need at least 8 vertices")
        self.source = source
        self.target = target
        self.offset = offset

    @property
    def aligned_target(self) -> np.ndarray:
        return np.roll(self.target, -self.offset, axis=0)


def _largest_ring(shape: GeoShape) -> tuple[GeoPoint, ...]:
    """Outer ring of the largest-area polygon. Multipolygons morph by their
    largest ring only; the remaining rings fade (documented limitation)."""
    _require_polygonal(shape, "morph")
    if shape.is_empty:
        raise InvalidGeometryError("cannot morph an empty shape")
    best = None
    best_area = -1.0
    for poly in shape.polygons:
        ring = poly[0]
        xy = _vertex_array(ring)
        a = abs(_shoelace(xy))
        if a > best_area:
            best_area = a
            best = ring
    assert best is not None
    return best


def _ring_array(ring: Sequence[GeoPoint]) -> np.ndarray:
    arr = _vertex_array(ring)
    if not np.array_equal(arr[0], arr[-1]):
        arr = np.vstack([arr, arr[0]])
    return arr


def _ensure_ccw(arr: np.ndarray) -> np.ndarray:
    # signed area in (lon, lat) plane; arr is closed (lat, lon)
    xy = np.column_stack([arr[:, 1], arr[:, 0]])
    if _shoelace(xy) < 0:
        return arr[::-1].copy()
    return arr


def resample_ring(shape: GeoShape, n: int) -> np.ndarray:
    """Resample the shape's largest outer ring to n vertices at uniform
    (planar-degree) arc length. Returns an (n, 2) lat/lon array of the open
    ring in counterclockwise orientation, starting from the original first
    vertex."""
    ring = _largest_ring(shape)
    arr = _ensure_ccw(_ring_array(ring))
    deltas = np.diff(arr, axis=0)
    seg = np.hypot(deltas[:, 0], deltas[:, 1])
    total = float(seg.sum())
    if total == 0.0:
        raise InvalidGeometryError("cannot resample a degenerate (zero-length) ring")
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, total, n, endpoint=False)
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(seg) - 1)
    local = (targets - cum[idx]) / np.where(seg[idx] > 0, seg[idx], 1.0)
    return arr[idx] + deltas[idx] * local[:, None]


def ring_correspondence(a: GeoShape, b: GeoShape) -> RingCorrespondence:
    """Exhaustive rotation-offset search, O(n^2), minimal summed squared
    distance. n = max(64, larger input ring vertex count)."""
    ring_a = _largest_ring(a)
    ring_b = _largest_ring(b)
    n = max(MIN_MORPH_VERTICES, len(ring_a) - 1, len(ring_b) - 1)
    src = resample_ring(a, n)
    dst = resample_ring(b, n)
    if abs(_shoelace(np.column_stack([np.append(src[:, 1], src[0, 1]), np.append(src[:, 0], src[0, 0])]))) < 1e-12:
        raise InvalidGeometryError("cannot morph a zero-area ring")
    best_offset = 0
    best_cost = math.inf
    for offset in range(n):
        rolled = np.roll(dst, -offset, axis=0)
        cost = float(np.sum((src - rolled) ** 2))
        if cost < best_cost:
            best_cost = cost
            best_offset = offset
    return RingCorrespondence(src, dst, best_offset)


def morph_with_correspondence(corr: RingCorrespondence, fraction: float) -> GeoShape:
    fraction = min(1.0, max(0.0, fraction))
    pts = (1.0 - fraction) * corr.source + fraction * corr.aligned_target
    closed = np.vstack([pts, pts[0]])
    return GeoShape(kind=ShapeKind.polygon, coordinates=[[(float(la), float(lo)) for la, lo in closed]])


def morph(a: GeoShape, b: GeoShape, fraction: float) -> GeoShape:
    """Interpolate polygon a into polygon b. Endpoints reproduce the
    resampled inputs exactly; intermediate shapes are closed rings."""
    return morph_with_correspondence(ring_correspondence(a, b), fraction)
