"""Independent test oracles.

These implementations deliberately avoid the library's geometry code paths:
point-in-polygon is a numpy crossing-number test, Monte Carlo areas sample
the sphere directly, and the second great-circle formula is the spherical
law of cosines. They exist so the shapely-backed boolean operations and the
hand-written area/haversine code are each checked against something that
shares no code with them.
"""

from __future__ import annotations

import math

import numpy as np

from mapmotion.model import GeoPoint, GeoShape, ShapeKind

EARTH_RADIUS_KM = 6371.0088


def law_of_cosines_km(p: GeoPoint, q: GeoPoint) -> float:
    lat1, lon1, lat2, lon2 = map(math.radians, (p.lat, p.lon, q.lat, q.lon))
    c = math.sin(lat1) * math.sin(lat2) + math.cos(lat1) * math.cos(lat2) * math.cos(lon2 - lon1)
    return EARTH_RADIUS_KM * math.acos(min(1.0, max(-1.0, c)))


def spherical_quad_area_km2(lat_min: float, lat_max: float, lon_min: float, lon_max: float) -> float:
    """Exact area of a lat/lon-aligned spherical quadrilateral."""
    return (
        EARTH_RADIUS_KM**2
        * math.radians(lon_max - lon_min)
        * (math.sin(math.radians(lat_max)) - math.sin(math.radians(lat_min)))
    )


def _rings_lonlat(shape: GeoShape) -> list[list[np.ndarray]]:
    """Per-polygon list of closed rings as (m, 2) lon/lat arrays."""
    out = []
    for poly in shape.polygons:
        out.append([np.array([[p.lon, p.lat] for p in ring], dtype=float) for ring in poly])
    return out


def _in_ring(lon: np.ndarray, lat: np.ndarray, ring: np.ndarray) -> np.ndarray:
    """Crossing-number parity per point for one closed ring."""
    x0, y0 = ring[:-1, 0], ring[:-1, 1]
    x1, y1 = ring[1:, 0], ring[1:, 1]
    inside = np.zeros(lon.shape[0], dtype=bool)
    for i in range(len(x0)):
        if y0[i] == y1[i]:
            continue
        cond = (y0[i] <= lat) != (y1[i] <= lat)
        x_cross = x0[i] + (lat - y0[i]) * (x1[i] - x0[i]) / (y1[i] - y0[i])
        inside ^= cond & (lon < x_cross)
    return inside


def points_in_shape(lon: np.ndarray, lat: np.ndarray, shape: GeoShape) -> np.ndarray:
    """Even-odd containment: inside any polygon of the shape (holes via
    ring parity within a polygon)."""
    if shape.kind not in (ShapeKind.polygon, ShapeKind.multipolygon):
        raise ValueError("containment oracle needs polygonal shapes")
    result = np.zeros(lon.shape[0], dtype=bool)
    for rings in _rings_lonlat(shape):
        parity = np.zeros(lon.shape[0], dtype=bool)
        for ring in rings:
            parity ^= _in_ring(lon, lat, ring)
        result |= parity
    return result


def shape_bbox(shape: GeoShape) -> tuple[float, float, float, float]:
    verts = shape.vertices()
    lats = [p.lat for p in verts]
    lons = [p.lon for p in verts]
    return min(lats), max(lats), min(lons), max(lons)


def sample_sphere_bbox(
    rng: np.random.Generator, lat_min: float, lat_max: float, lon_min: float, lon_max: float, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Spherically uniform samples within a lat/lon box (lat drawn uniform
    in sin(lat))."""
    lon = rng.uniform(lon_min, lon_max, n)
    s = rng.uniform(math.sin(math.radians(lat_min)), math.sin(math.radians(lat_max)), n)
    lat = np.degrees(np.arcsin(s))
    return lon, lat


def mc_area_km2(shapes: list[GeoShape], mode: str, n: int = 1_000_000, seed: int = 0) -> float:
    """Monte Carlo rasterization of a region defined by input shapes.

    mode: "single" (shapes[0]), "union" (any shape), "difference"
    (inside shapes[0] and not shapes[1]).
    """
    rng = np.random.default_rng(seed)
    boxes = [shape_bbox(s) for s in (shapes if mode == "union" else shapes[:1])]
    lat_min = min(b[0] for b in boxes)
    lat_max = max(b[1] for b in boxes)
    lon_min = min(b[2] for b in boxes)
    lon_max = max(b[3] for b in boxes)
    if lat_max == lat_min or lon_max == lon_min:
        return 0.0
    box_area = spherical_quad_area_km2(lat_min, lat_max, lon_min, lon_max)

    hits = 0
    chunk = 200_000
    remaining = n
    while remaining > 0:
        m = min(chunk, remaining)
        lon, lat = sample_sphere_bbox(rng, lat_min, lat_max, lon_min, lon_max, m)
        if mode == "single":
            inside = points_in_shape(lon, lat, shapes[0])
        elif mode == "union":
            inside = np.zeros(m, dtype=bool)
            for s in shapes:
                inside |= points_in_shape(lon, lat, s)
        elif mode == "difference":
            inside = points_in_shape(lon, lat, shapes[0]) & ~points_in_shape(lon, lat, shapes[1])
        else:
            raise ValueError(mode)
        hits += int(inside.sum())
        remaining -= m
    return box_area * hits / n


def mc_centroid(shape: GeoShape, n: int = 1_000_000, seed: int = 0) -> GeoPoint:
    rng = np.random.default_rng(seed)
    lat_min, lat_max, lon_min, lon_max = shape_bbox(shape)
    lon, lat = sample_sphere_bbox(rng, lat_min, lat_max, lon_min, lon_max, n)
    inside = points_in_shape(lon, lat, shape)
    return GeoPoint(lat=float(lat[inside].mean()), lon=float(lon[inside].mean()))


def sample_interior_points(
    shape: GeoShape, count: int, seed: int = 0, margin_deg: float = 1e-6
) -> list[GeoPoint]:
    """Rejection-sample interior points, excluding anything within
    margin_deg of a ring edge (snap-rounding tolerance exclusion)."""
    rng = np.random.default_rng(seed)
    lat_min, lat_max, lon_min, lon_max = shape_bbox(shape)
    edges = []
    for rings in _rings_lonlat(shape):
        for ring in rings:
            edges.append((ring[:-1], ring[1:]))
    out: list[GeoPoint] = []
    attempts = 0
    while len(out) < count and attempts < 400:
        attempts += 1
        m = max(4 * (count - len(out)), 256)
        lon = rng.uniform(lon_min, lon_max, m)
        lat = rng.uniform(lat_min, lat_max, m)
        inside = points_in_shape(lon, lat, shape)
        if not inside.any():
            continue
        lon, lat = lon[inside], lat[inside]
        keep = np.ones(lon.shape[0], dtype=bool)
        for a, b in edges:
            d = _point_segment_dist(lon, lat, a, b)
            keep &= d > margin_deg
        for lo, la in zip(lon[keep], lat[keep]):
            out.append(GeoPoint(lat=float(la), lon=float(lo)))
            if len(out) == count:
                break
    if len(out) < count:
        raise RuntimeError("could not sample enough interior points")
    return out


def _point_segment_dist(lon: np.ndarray, lat: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Min distance from each point to any segment in (a[i], b[i])."""
    px = lon[:, None] - a[None, :, 0]
    py = lat[:, None] - a[None, :, 1]
    dx = (b - a)[None, :, 0]
    dy = (b - a)[None, :, 1]
    seg_len2 = dx * dx + dy * dy
    t = np.clip((px * dx + py * dy) / np.where(seg_len2 > 0, seg_len2, 1.0), 0.0, 1.0)
    ex = px - t * dx
    ey = py - t * dy
    return np.sqrt(ex * ex + ey * ey).min(axis=1)


def hausdorff_deg(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two vertex sets (n, 2) lat/lon."""
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    return max(float(d.min(axis=1).max()), float(d.min(axis=0).max()))


def random_convex_polygon(rng: np.random.Generator, max_vertices: int = 12) -> GeoShape:
    """Convex hull of random points; center within +-55 deg latitude."""
    clat = rng.uniform(-55, 55)
    clon = rng.uniform(-150, 150)
    size = rng.uniform(0.5, 3.0)
    n = int(rng.integers(4, max_vertices + 1))
    pts = np.column_stack([rng.uniform(-size, size, n + 4), rng.uniform(-size, size, n + 4)])
    hull = _convex_hull(pts)[: max_vertices]
    ring = [(clat + p[1], clon + p[0]) for p in hull]
    return GeoShape.from_polygon([ring])


def random_star_polygon(rng: np.random.Generator, max_vertices: int = 12) -> GeoShape:
    """Star-shaped (radially monotone) simple polygon. Angular gaps are
    kept under 180 degrees so every chord stays inside its convex sector
    and the ring cannot self-intersect."""
    clat = rng.uniform(-55, 55)
    clon = rng.uniform(-150, 150)
    n = int(rng.integers(5, max_vertices + 1))
    jitter = rng.uniform(0.05, 0.95, n)
    angles = 2 * math.pi * (np.arange(n) + jitter) / n
    radii = rng.uniform(0.3, 2.5, n)
    ring = [(clat + r * math.sin(a), clon + r * math.cos(a)) for a, r in zip(angles, radii)]
    return GeoShape.from_polygon([ring])


def _convex_hull(points: np.ndarray) -> np.ndarray:
    pts = points[np.lexsort((points[:, 1], points[:, 0]))]

    def cross(o: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def half(iterable):
        hull: list[np.ndarray] = []
        for p in iterable:
            while len(hull) >= 2 and cross(hull[-2], hull[-1], p) <= 0:
                hull.pop()
            hull.append(p)
        return hull

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])
