"""Built-in accuracy validators for resolved animation payloads.

These implement the grading checks used when judging generated blocks
against reference expectations: camera blocks must land on the right
location at the right zoom, and generated routes must stay within a
kilometer of the reference polyline.
"""

from __future__ import annotations

import numpy as np

from .geometry import haversine_km, point_along
from .model import GeoPoint, GeoShape

ROUTE_TOLERANCE_KM = 1.0
ZOOM_TOLERANCE = 1.0
DEFAULT_SAMPLES = 100


def max_route_deviation_km(route: GeoShape, reference: GeoShape, samples: int = DEFAULT_SAMPLES) -> float:
    """Maximum pointwise distance between two polylines, sampled at equal
    arc-length fractions so differing waypoint counts still compare."""
    worst = 0.0
    for f in np.linspace(0.0, 1.0, samples):
        a, _ = point_along(route, float(f))
        b, _ = point_along(reference, float(f))
        worst = max(worst, haversine_km(a, b))
    return worst


def route_matches(route: GeoShape, reference: GeoShape, tolerance_km: float = ROUTE_TOLERANCE_KM) -> bool:
    return max_route_deviation_km(route, reference) < tolerance_km


def zoom_matches(actual: float, expected: float, tolerance: float = ZOOM_TOLERANCE) -> bool:
    return abs(actual - expected) <= tolerance


def location_matches(actual: GeoPoint, expected: GeoPoint, tolerance_km: float = ROUTE_TOLERANCE_KM) -> bool:
    return haversine_km(actual, expected) < tolerance_km
