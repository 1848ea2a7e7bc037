from __future__ import annotations

import pytest

from mapmotion.model import (
    AnimationBlock,
    BlockKind,
    CameraZoomArgs,
    GeoPoint,
    GeoShape,
    HighlightAreaArgs,
    Timeline,
)


def square(lat0: float, lon0: float, size: float = 1.0) -> GeoShape:
    """Axis-aligned square polygon with corner at (lat0, lon0)."""
    return GeoShape.from_polygon(
        [[(lat0, lon0), (lat0, lon0 + size), (lat0 + size, lon0 + size), (lat0 + size, lon0)]]
    )


def highlight_block(block_id: str, start: float, end: float, lat0: float = 0.0, lon0: float = 0.0) -> AnimationBlock:
    return AnimationBlock(
        id=block_id,
        kind=BlockKind.highlight_area,
        start_time=start,
        end_time=end,
        args=HighlightAreaArgs(shape=square(lat0, lon0)),
    )


def camera_block(block_id: str, start: float, end: float, lat: float = 0.0, lon: float = 0.0, zoom: float = 5.0) -> AnimationBlock:
    return AnimationBlock(
        id=block_id,
        kind=BlockKind.camera_zoom,
        start_time=start,
        end_time=end,
        args=CameraZoomArgs(target=GeoPoint(lat=lat, lon=lon), zoom_level=zoom),
    )


@pytest.fixture
def two_highlights() -> Timeline:
    return Timeline(blocks=(highlight_block("a", 0, 5), highlight_block("b", 5, 8, lat0=2.0)))
