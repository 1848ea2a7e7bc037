"""Core timeline document model.

Defines the geometry payload types, the nine animation block kinds, the
timeline document with edit operations, and structural validation. All types
are immutable value objects; operations are pure functions, safe to share
between threads.

Serialization goes through explicit ``*_to_doc`` / ``*_from_doc``
functions that produce plain dict documents for :mod:`mapmotion.canonical`.
Geometry embeds as standard GeoJSON geometry objects (lon, lat order);
everywhere else coordinates are explicit ``{"lat", "lon"}`` objects.
"""

from __future__ import annotations

import enum
from typing import Any, ClassVar, Mapping, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .canonical import round_time
from .errors import InvariantError, NotFoundError, UnsupportedGeometryError


class Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


# ---------------------------------------------------------------------------
# Geometry payload types
# ---------------------------------------------------------------------------


class GeoPoint(Frozen):
    """WGS84 coordinate, degrees. Internal order is (lat, lon); GeoJSON
    order (lon, lat) appears only at the format boundary."""

    lat: float = Field(ge=-90.0, le=90.0)
    lon: float = Field(ge=-180.0, le=180.0)


class BoundingBox(Frozen):
    """Axis-aligned box; antimeridian-crossing boxes are not supported."""

    min: GeoPoint
    max: GeoPoint

    @model_validator(mode="after")
    def _ordered(self) -> "BoundingBox":
        if self.min.lat > self.max.lat or self.min.lon > self.max.lon:
            raise ValueError("bounding box min must not exceed max")
        return self

    @property
    def center(self) -> GeoPoint:
        return GeoPoint(lat=(self.min.lat + self.max.lat) / 2.0, lon=(self.min.lon + self.max.lon) / 2.0)


class ShapeKind(str, enum.Enum):
    point = "point"
    line = "line"
    polygon = "polygon"
    multipolygon = "multipolygon"


def _as_point(value: Any) -> GeoPoint:
    if isinstance(value, GeoPoint):
        return value
    if isinstance(value, Mapping):
        return GeoPoint(lat=value["lat"], lon=value["lon"])
    if isinstance(value, Sequence) and len(value) == 2:
        return GeoPoint(lat=value[0], lon=value[1])
    raise ValueError(f"cannot interpret {value!r} as a coordinate")


def _ring(values: Sequence[Any]) -> tuple[GeoPoint, ...]:
    pts = tuple(_as_point(v) for v in values)
    if len(pts) < 4:
        raise ValueError("polygon ring needs at least 4 vertices (closed)")
    if pts[0] != pts[-1]:
        raise ValueError("polygon ring must be closed (first vertex == last vertex)")
    return pts


class GeoShape(Frozen):
    """Tagged geometry. ``coordinates`` nesting depth depends on ``kind``:

    - point: one GeoPoint
    - line: tuple of >= 2 GeoPoints
    - polygon: tuple of closed rings (outer first, then holes)
    - multipolygon: tuple of polygons (possibly empty => empty shape)
    """

    kind: ShapeKind
    coordinates: Any
    properties: dict[str, str] = Field(default_factory=dict)

    @model_validator(mode="before")
    @classmethod
    def _normalize(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        kind = data.get("kind")
        coords = data.get("coordinates")
        if kind is None or coords is None:
            return data
        kind = ShapeKind(kind)
        if kind is ShapeKind.point:
            coords = _as_point(coords)
        elif kind is ShapeKind.line:
            pts = tuple(_as_point(v) for v in coords)
            if len(pts) < 2:
                raise ValueError("line needs at least 2 vertices")
            coords = pts
        elif kind is ShapeKind.polygon:
            rings = tuple(_ring(r) for r in coords)
            if not rings:
                raise ValueError("polygon needs at least one ring")
            coords = rings
        else:
            coords = tuple(tuple(_ring(r) for r in poly) for poly in coords)
            if any(not poly for poly in coords):
                raise ValueError("multipolygon member needs at least one ring")
        data = dict(data)
        data["kind"] = kind
        data["coordinates"] = coords
        return data

    # -- constructors -------------------------------------------------

    @classmethod
    def from_point(cls, point: Any, properties: dict[str, str] | None = None) -> "GeoShape":
        return cls(kind=ShapeKind.point, coordinates=point, properties=properties or {})

    @classmethod
    def from_path(cls, points: Sequence[Any], properties: dict[str, str] | None = None) -> "GeoShape":
        return cls(kind=ShapeKind.line, coordinates=points, properties=properties or {})

    @classmethod
    def from_polygon(cls, rings: Sequence[Sequence[Any]], properties: dict[str, str] | None = None) -> "GeoShape":
        closed = [list(r) + ([r[0]] if list(r)[0] != list(r)[-1] else []) for r in (list(r) for r in rings)]
        return cls(kind=ShapeKind.polygon, coordinates=closed, properties=properties or {})

    @classmethod
    def from_multipolygon(
        cls, polygons: Sequence[Sequence[Sequence[Any]]], properties: dict[str, str] | None = None
    ) -> "GeoShape":
        return cls(kind=ShapeKind.multipolygon, coordinates=polygons, properties=properties or {})

    @classmethod
    def empty(cls) -> "GeoShape":
        return cls(kind=ShapeKind.multipolygon, coordinates=())

    # -- accessors ----------------------------------------------------

    @property
    def point(self) -> GeoPoint:
        if self.kind is not ShapeKind.point:
            raise InvariantError(f"shape of kind {self.kind.value} has no point")
        return self.coordinates

    @property
    def path(self) -> tuple[GeoPoint, ...]:
        if self.kind is not ShapeKind.line:
            raise InvariantError(f"shape of kind {self.kind.value} has no path")
        return self.coordinates

    @property
    def rings(self) -> tuple[tuple[GeoPoint, ...], ...]:
        if self.kind is not ShapeKind.polygon:
            raise InvariantError(f"shape of kind {self.kind.value} has no rings")
        return self.coordinates

    @property
    def polygons(self) -> tuple[tuple[tuple[GeoPoint, ...], ...], ...]:
        """Uniform polygon view: a polygon is a 1-tuple of its ring set."""
        if self.kind is ShapeKind.polygon:
            return (self.coordinates,)
        if self.kind is ShapeKind.multipolygon:
            return self.coordinates
        raise InvariantError(f"shape of kind {self.kind.value} has no polygons")

    @property
    def is_empty(self) -> bool:
        return self.kind is ShapeKind.multipolygon and len(self.coordinates) == 0

    def vertices(self) -> list[GeoPoint]:
        if self.kind is ShapeKind.point:
            return [self.coordinates]
        if self.kind is ShapeKind.line:
            return list(self.coordinates)
        return [p for poly in self.polygons for ring in poly for p in ring]


# -- GeoJSON boundary ------------------------------------------------------

_GEOJSON_KIND = {
    "Point": ShapeKind.point,
    "LineString": ShapeKind.line,
    "Polygon": ShapeKind.polygon,
    "MultiPolygon": ShapeKind.multipolygon,
}
_KIND_GEOJSON = {v: k for k, v in _GEOJSON_KIND.items()}


def _pos(p: GeoPoint) -> list[float]:
    return [p.lon, p.lat]


def shape_to_geojson(shape: GeoShape) -> dict[str, Any]:
    """Emit an RFC 7946 geometry object (lon, lat positions)."""
    if shape.kind is ShapeKind.point:
        coords: Any = _pos(shape.point)
    elif shape.kind is ShapeKind.line:
        coords = [_pos(p) for p in shape.path]
    elif shape.kind is ShapeKind.polygon:
        coords = [[_pos(p) for p in ring] for ring in shape.rings]
    else:
        coords = [[[_pos(p) for p in ring] for ring in poly] for poly in shape.polygons]
    doc: dict[str, Any] = {"type": _KIND_GEOJSON[shape.kind], "coordinates": coords}
    if shape.properties:
        doc["properties"] = dict(shape.properties)
    return doc


def shape_from_geojson(doc: Mapping[str, Any]) -> GeoShape:
    """Parse an RFC 7946 geometry object; accepts Point, LineString,
    Polygon and MultiPolygon, rejects every other type."""
    gtype = doc.get("type")
    if gtype not in _GEOJSON_KIND:
        raise UnsupportedGeometryError(f"unsupported GeoJSON geometry type {gtype!r}", raw=str(doc))
    kind = _GEOJSON_KIND[gtype]
    coords = doc["coordinates"]

    def pt(pos: Sequence[float]) -> GeoPoint:
        return GeoPoint(lat=pos[1], lon=pos[0])

    if kind is ShapeKind.point:
        converted: Any = pt(coords)
    elif kind is ShapeKind.line:
        converted = [pt(p) for p in coords]
    elif kind is ShapeKind.polygon:
        converted = [[pt(p) for p in ring] for ring in coords]
    else:
        converted = [[[pt(p) for p in ring] for ring in poly] for poly in coords]
    properties = {str(k): str(v) for k, v in (doc.get("properties") or {}).items()}
    return GeoShape(kind=kind, coordinates=converted, properties=properties)


# ---------------------------------------------------------------------------
# Block kinds and arguments
# ---------------------------------------------------------------------------


class BlockKind(str, enum.Enum):
    highlight_area = "highlight_area"
    highlight_line = "highlight_line"
    highlight_point = "highlight_point"
    camera_zoom = "camera_zoom"
    camera_translate = "camera_translate"
    camera_orbit = "camera_orbit"
    element_route = "element_route"
    element_spatial_transition = "element_spatial_transition"
    element_auxiliary_motion = "element_auxiliary_motion"


_CATEGORY = {
    BlockKind.highlight_area: "highlight",
    BlockKind.highlight_line: "highlight",
    BlockKind.highlight_point: "highlight",
    BlockKind.camera_zoom: "camera",
    BlockKind.camera_translate: "camera",
    BlockKind.camera_orbit: "camera",
    BlockKind.element_route: "element",
    BlockKind.element_spatial_transition: "element",
    BlockKind.element_auxiliary_motion: "element",
}


def category(kind: BlockKind) -> str:
    return _CATEGORY[kind]


def is_camera(kind: BlockKind) -> bool:
    return _CATEGORY[kind] == "camera"


class HighlightAreaArgs(Frozen):
    KIND: ClassVar[BlockKind] = BlockKind.highlight_area
    shape: GeoShape

    @field_validator("shape")
    @classmethod
    def _polygonal(cls, v: GeoShape) -> GeoShape:
        if v.kind not in (ShapeKind.polygon, ShapeKind.multipolygon):
            raise ValueError("area highlight needs a polygon or multipolygon")
        return v


class HighlightLineArgs(Frozen):
    KIND: ClassVar[BlockKind] = BlockKind.highlight_line
    path: GeoShape

    @field_validator("path")
    @classmethod
    def _line(cls, v: GeoShape) -> GeoShape:
        if v.kind is not ShapeKind.line:
            raise ValueError("line highlight needs a line shape")
        return v


class HighlightPointArgs(Frozen):
    KIND: ClassVar[BlockKind] = BlockKind.highlight_point
    point: GeoPoint


class CameraZoomArgs(Frozen):
    KIND: ClassVar[BlockKind] = BlockKind.camera_zoom
    target: GeoPoint
    zoom_level: float = Field(ge=0.0, le=22.0)


class CameraTranslateArgs(Frozen):
    KIND: ClassVar[BlockKind] = BlockKind.camera_translate
    from_point: GeoPoint
    to_point: GeoPoint
    zoom_level: float = Field(ge=0.0, le=22.0)


class CameraOrbitArgs(Frozen):
    KIND: ClassVar[BlockKind] = BlockKind.camera_orbit
    center: GeoPoint
    zoom_level: float = Field(ge=0.0, le=22.0)
    sweep: float
    direction: str = Field(pattern="^(cw|ccw)$")
    start_bearing: Optional[float] = None

    @field_validator("sweep")
    @classmethod
    def _nonzero(cls, v: float) -> float:
        if v == 0:
            raise ValueError("orbit sweep must be nonzero")
        return v


class ElementRouteArgs(Frozen):
    KIND: ClassVar[BlockKind] = BlockKind.element_route
    path: GeoShape
    sprite: Optional[str] = None

    @field_validator("path")
    @classmethod
    def _line(cls, v: GeoShape) -> GeoShape:
        if v.kind is not ShapeKind.line or len(v.path) < 2:
            raise ValueError("route needs a line with at least 2 points")
        return v


class ElementSpatialTransitionArgs(Frozen):
    KIND: ClassVar[BlockKind] = BlockKind.element_spatial_transition
    from_shape: GeoShape
    to_shape: GeoShape

    @field_validator("from_shape", "to_shape")
    @classmethod
    def _polygonal(cls, v: GeoShape) -> GeoShape:
        if v.kind not in (ShapeKind.polygon, ShapeKind.multipolygon):
            raise ValueError("spatial transition needs polygon shapes")
        return v


class ElementAuxiliaryMotionArgs(Frozen):
    KIND: ClassVar[BlockKind] = BlockKind.element_auxiliary_motion
    region: BoundingBox
    cluster_count: int = Field(ge=1)
    sprite: Optional[str] = None
    seed: int = Field(ge=0, lt=2**64)


BlockArgs = Union[
    HighlightAreaArgs,
    HighlightLineArgs,
    HighlightPointArgs,
    CameraZoomArgs,
    CameraTranslateArgs,
    CameraOrbitArgs,
    ElementRouteArgs,
    ElementSpatialTransitionArgs,
    ElementAuxiliaryMotionArgs,
]

ARGS_TYPE: dict[BlockKind, type] = {
    cls.KIND: cls
    for cls in (
        HighlightAreaArgs,
        HighlightLineArgs,
        HighlightPointArgs,
        CameraZoomArgs,
        CameraTranslateArgs,
        CameraOrbitArgs,
        ElementRouteArgs,
        ElementSpatialTransitionArgs,
        ElementAuxiliaryMotionArgs,
    )
}


class StyleOverrides(Frozen):
    color: Optional[str] = None
    opacity: float = Field(default=1.0, ge=0.0, le=1.0)
    label: Optional[str] = None
    image_asset: Optional[str] = None


class AnimationBlock(Frozen):
    """One timed animation unit. ``end_time > start_time`` is a timeline-
    level invariant reported by :func:`validate_timeline` (state after an
    edit must stay representable so validation can describe it)."""

    id: str = Field(min_length=1)
    kind: BlockKind
    start_time: float = Field(ge=0.0)
    end_time: float
    args: BlockArgs
    style: StyleOverrides = StyleOverrides()

    @model_validator(mode="after")
    def _args_match(self) -> "AnimationBlock":
        if type(self.args).KIND is not self.kind:
            raise ValueError(f"args tag {type(self.args).KIND.value} does not match block kind {self.kind.value}")
        return self

    @property
    def duration(self) -> float:
        return self.end_time - self.start_time


class MapStyle(str, enum.Enum):
    streets = "streets"
    satellite = "satellite"
    light = "light"
    dark = "dark"
    terrain = "terrain"


class Timeline(Frozen):
    blocks: tuple[AnimationBlock, ...] = ()
    map_style: MapStyle = MapStyle.streets

    @property
    def duration(self) -> float:
        return max((b.end_time for b in self.blocks), default=0.0)

    def block(self, block_id: str) -> AnimationBlock:
        for b in self.blocks:
            if b.id == block_id:
                return b
        raise NotFoundError(f"no block with id {block_id}", {"block_id": block_id})


# ---------------------------------------------------------------------------
# Scene breakdown
# ---------------------------------------------------------------------------


class SceneBreakdownItem(Frozen):
    id: str = Field(min_length=1)
    kind: BlockKind
    short_description: str = Field(min_length=1)
    long_description: str = ""
    resolved: bool = False
    user_notes: str = ""
    resolved_args: Optional[BlockArgs] = None

    @model_validator(mode="after")
    def _resolved_args_match(self) -> "SceneBreakdownItem":
        if self.resolved_args is not None and type(self.resolved_args).KIND is not self.kind:
            raise ValueError("resolved args tag does not match item kind")
        return self


class SceneBreakdown(Frozen):
    items: tuple[SceneBreakdownItem, ...] = ()
    source_script_hash: str = ""

    def item(self, item_id: str) -> SceneBreakdownItem:
        for it in self.items:
            if it.id == item_id:
                return it
        raise NotFoundError(f"no breakdown item with id {item_id}", {"item_id": item_id})


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

DEFAULT_CAMERA_LEAD_WINDOW = 0.5


class Violation(Frozen):
    code: str
    message: str
    block_ids: tuple[str, ...] = ()


class ValidationReport(Frozen):
    errors: tuple[Violation, ...] = ()
    warnings: tuple[Violation, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.errors


def validate_timeline(timeline: Timeline, camera_lead_window: float = DEFAULT_CAMERA_LEAD_WINDOW) -> ValidationReport:
    """Structural validation. Never raises on invalid content: violations
    come back in the report. Non-camera blocks must not overlap each other;
    camera blocks may overlap non-camera blocks (but not other cameras).
    The camera-precedes-content rule is a heuristic, reported as a warning.
    """
    errors: list[Violation] = []
    warnings: list[Violation] = []

    seen: dict[str, int] = {}
    for b in timeline.blocks:
        seen[b.id] = seen.get(b.id, 0) + 1
        if b.end_time <= b.start_time:
            errors.append(
                Violation(
                    code="invariant",
                    message=f"block {b.id} has end_time {b.end_time} <= start_time {b.start_time}",
                    block_ids=(b.id,),
                )
            )
    for block_id, count in seen.items():
        if count > 1:
            errors.append(
                Violation(code="invariant", message=f"block id {block_id} appears {count} times", block_ids=(block_id,))
            )

    well_formed = [b for b in timeline.blocks if b.end_time > b.start_time]
    for i, a in enumerate(well_formed):
        for b in well_formed[i + 1 :]:
            if is_camera(a.kind) != is_camera(b.kind):
                continue
            if a.start_time < b.end_time and b.start_time < a.end_time:
                pair = "camera" if is_camera(a.kind) else "non-camera"
                errors.append(
                    Violation(
                        code="overlap",
                        message=f"{pair} blocks {a.id} and {b.id} overlap in time",
                        block_ids=(a.id, b.id),
                    )
                )

    cameras = [b for b in well_formed if is_camera(b.kind)]
    for b in well_formed:
        if is_camera(b.kind):
            continue
        covered = any(c.start_time <= b.start_time < c.end_time for c in cameras)
        led = any(b.start_time - camera_lead_window <= c.end_time <= b.start_time for c in cameras)
        if not covered and not led:
            warnings.append(
                Violation(
                    code="camera_lead",
                    message=f"block {b.id} is not covered or led (within {camera_lead_window}s) by a camera block",
                    block_ids=(b.id,),
                )
            )

    return ValidationReport(errors=tuple(errors), warnings=tuple(warnings))


# ---------------------------------------------------------------------------
# Edits
# ---------------------------------------------------------------------------


class RetimeEdit(Frozen):
    op: str = "retime"
    block_id: str
    start_time: float
    end_time: float


class ReorderEdit(Frozen):
    op: str = "reorder"
    block_id: str
    index: int


class DeleteEdit(Frozen):
    op: str = "delete"
    block_id: str


class UpdateArgsEdit(Frozen):
    op: str = "update_args"
    block_id: str
    args: BlockArgs


class UpdateStyleEdit(Frozen):
    op: str = "update_style"
    block_id: str
    style: StyleOverrides


class InsertEdit(Frozen):
    op: str = "insert"
    block: AnimationBlock
    index: Optional[int] = None


Edit = Union[RetimeEdit, ReorderEdit, DeleteEdit, UpdateArgsEdit, UpdateStyleEdit, InsertEdit]


def _index_of(timeline: Timeline, block_id: str) -> int:
    for i, b in enumerate(timeline.blocks):
        if b.id == block_id:
            return i
    raise NotFoundError(f"no block with id {block_id}", {"block_id": block_id})


def apply_edit(timeline: Timeline, edit: Edit) -> Timeline:
    """Pure edit application: returns a new timeline, untouched blocks are
    the same objects (hence byte-identical on serialization)."""
    blocks = list(timeline.blocks)

    if isinstance(edit, RetimeEdit):
        i = _index_of(timeline, edit.block_id)
        if edit.start_time < 0:
            raise InvariantError(f"retime start_time {edit.start_time} is negative")
        if edit.end_time <= edit.start_time:
            raise InvariantError(f"retime would produce end_time {edit.end_time} <= start_time {edit.start_time}")
        blocks[i] = blocks[i].model_copy(update={"start_time": edit.start_time, "end_time": edit.end_time})
    elif isinstance(edit, ReorderEdit):
        i = _index_of(timeline, edit.block_id)
        if not 0 <= edit.index < len(blocks):
            raise InvariantError(f"reorder index {edit.index} out of range")
        b = blocks.pop(i)
        blocks.insert(edit.index, b)
    elif isinstance(edit, DeleteEdit):
        i = _index_of(timeline, edit.block_id)
        blocks.pop(i)
    elif isinstance(edit, UpdateArgsEdit):
        i = _index_of(timeline, edit.block_id)
        if type(edit.args).KIND is not blocks[i].kind:
            raise InvariantError("update_args payload does not match block kind")
        blocks[i] = blocks[i].model_copy(update={"args": edit.args})
    elif isinstance(edit, UpdateStyleEdit):
        i = _index_of(timeline, edit.block_id)
        blocks[i] = blocks[i].model_copy(update={"style": edit.style})
    elif isinstance(edit, InsertEdit):
        if any(b.id == edit.block.id for b in blocks):
            raise InvariantError(f"block id {edit.block.id} already exists")
        if edit.block.end_time <= edit.block.start_time:
            raise InvariantError("inserted block has end_time <= start_time")
        index = len(blocks) if edit.index is None else edit.index
        if not 0 <= index <= len(blocks):
            raise InvariantError(f"insert index {index} out of range")
        blocks.insert(index, edit.block)
    else:  # pragma: no cover - union is closed
        raise InvariantError(f"unknown edit {edit!r}")

    return Timeline(blocks=tuple(blocks), map_style=timeline.map_style)


# ---------------------------------------------------------------------------
# Documents (canonical dict form)
# ---------------------------------------------------------------------------


def point_to_doc(p: GeoPoint) -> dict[str, float]:
    return {"lat": p.lat, "lon": p.lon}


def point_from_doc(doc: Mapping[str, Any]) -> GeoPoint:
    return GeoPoint(lat=doc["lat"], lon=doc["lon"])


def bbox_to_doc(b: BoundingBox) -> dict[str, Any]:
    return {"min": point_to_doc(b.min), "max": point_to_doc(b.max)}


def bbox_from_doc(doc: Mapping[str, Any]) -> BoundingBox:
    return BoundingBox(min=point_from_doc(doc["min"]), max=point_from_doc(doc["max"]))


def style_to_doc(s: StyleOverrides) -> dict[str, Any]:
    return {"color": s.color, "opacity": s.opacity, "label": s.label, "image_asset": s.image_asset}


def style_from_doc(doc: Mapping[str, Any]) -> StyleOverrides:
    return StyleOverrides(
        color=doc.get("color"),
        opacity=doc.get("opacity", 1.0),
        label=doc.get("label"),
        image_asset=doc.get("image_asset"),
    )


def args_to_doc(args: BlockArgs) -> dict[str, Any]:
    if isinstance(args, HighlightAreaArgs):
        return {"shape": shape_to_geojson(args.shape)}
    if isinstance(args, HighlightLineArgs):
        return {"path": shape_to_geojson(args.path)}
    if isinstance(args, HighlightPointArgs):
        return {"point": point_to_doc(args.point)}
    if isinstance(args, CameraZoomArgs):
        return {"target": point_to_doc(args.target), "zoom_level": args.zoom_level}
    if isinstance(args, CameraTranslateArgs):
        return {"from": point_to_doc(args.from_point), "to": point_to_doc(args.to_point), "zoom_level": args.zoom_level}
    if isinstance(args, CameraOrbitArgs):
        return {
            "center": point_to_doc(args.center),
            "zoom_level": args.zoom_level,
            "sweep": args.sweep,
            "direction": args.direction,
            "start_bearing": args.start_bearing,
        }
    if isinstance(args, ElementRouteArgs):
        return {"path": shape_to_geojson(args.path), "sprite": args.sprite}
    if isinstance(args, ElementSpatialTransitionArgs):
        return {"from_shape": shape_to_geojson(args.from_shape), "to_shape": shape_to_geojson(args.to_shape)}
    if isinstance(args, ElementAuxiliaryMotionArgs):
        return {
            "region": bbox_to_doc(args.region),
            "cluster_count": args.cluster_count,
            "sprite": args.sprite,
            "seed": args.seed,
        }
    raise InvariantError(f"unknown args {args!r}")  # pragma: no cover


def args_from_doc(kind: BlockKind, doc: Mapping[str, Any]) -> BlockArgs:
    if kind is BlockKind.highlight_area:
        return HighlightAreaArgs(shape=shape_from_geojson(doc["shape"]))
    if kind is BlockKind.highlight_line:
        return HighlightLineArgs(path=shape_from_geojson(doc["path"]))
    if kind is BlockKind.highlight_point:
        return HighlightPointArgs(point=point_from_doc(doc["point"]))
    if kind is BlockKind.camera_zoom:
        return CameraZoomArgs(target=point_from_doc(doc["target"]), zoom_level=doc["zoom_level"])
    if kind is BlockKind.camera_translate:
        return CameraTranslateArgs(
            from_point=point_from_doc(doc["from"]), to_point=point_from_doc(doc["to"]), zoom_level=doc["zoom_level"]
        )
    if kind is BlockKind.camera_orbit:
        return CameraOrbitArgs(
            center=point_from_doc(doc["center"]),
            zoom_level=doc["zoom_level"],
            sweep=doc["sweep"],
            direction=doc["direction"],
            start_bearing=doc.get("start_bearing"),
        )
    if kind is BlockKind.element_route:
        return ElementRouteArgs(path=shape_from_geojson(doc["path"]), sprite=doc.get("sprite"))
    if kind is BlockKind.element_spatial_transition:
        return ElementSpatialTransitionArgs(
            from_shape=shape_from_geojson(doc["from_shape"]), to_shape=shape_from_geojson(doc["to_shape"])
        )
    if kind is BlockKind.element_auxiliary_motion:
        return ElementAuxiliaryMotionArgs(
            region=bbox_from_doc(doc["region"]),
            cluster_count=doc["cluster_count"],
            sprite=doc.get("sprite"),
            seed=doc["seed"],
        )
    raise InvariantError(f"unknown block kind {kind!r}")  # pragma: no cover


def block_to_doc(b: AnimationBlock) -> dict[str, Any]:
    return {
        "id": b.id,
        "kind": b.kind.value,
        "start_time": round_time(b.start_time),
        "end_time": round_time(b.end_time),
        "args": args_to_doc(b.args),
        "style": style_to_doc(b.style),
    }


def block_from_doc(doc: Mapping[str, Any]) -> AnimationBlock:
    kind = BlockKind(doc["kind"])
    return AnimationBlock(
        id=doc["id"],
        kind=kind,
        start_time=doc["start_time"],
        end_time=doc["end_time"],
        args=args_from_doc(kind, doc["args"]),
        style=style_from_doc(doc.get("style", {})),
    )


def timeline_to_doc(t: Timeline) -> dict[str, Any]:
    return {
        "blocks": [block_to_doc(b) for b in t.blocks],
        "duration": round_time(t.duration),
        "map_style": t.map_style.value,
    }


def timeline_from_doc(doc: Mapping[str, Any]) -> Timeline:
    return Timeline(
        blocks=tuple(block_from_doc(b) for b in doc.get("blocks", ())),
        map_style=MapStyle(doc.get("map_style", "streets")),
    )


def item_to_doc(it: SceneBreakdownItem) -> dict[str, Any]:
    return {
        "id": it.id,
        "kind": it.kind.value,
        "short_description": it.short_description,
        "long_description": it.long_description,
        "resolved": it.resolved,
        "user_notes": it.user_notes,
        "resolved_args": None if it.resolved_args is None else args_to_doc(it.resolved_args),
    }


def item_from_doc(doc: Mapping[str, Any]) -> SceneBreakdownItem:
    kind = BlockKind(doc["kind"])
    raw_args = doc.get("resolved_args")
    return SceneBreakdownItem(
        id=doc["id"],
        kind=kind,
        short_description=doc["short_description"],
        long_description=doc.get("long_description", ""),
        resolved=doc.get("resolved", False),
        user_notes=doc.get("user_notes", ""),
        resolved_args=None if raw_args is None else args_from_doc(kind, raw_args),
    )


def breakdown_to_doc(bd: SceneBreakdown) -> dict[str, Any]:
    return {"items": [item_to_doc(it) for it in bd.items], "source_script_hash": bd.source_script_hash}


def breakdown_from_doc(doc: Mapping[str, Any]) -> SceneBreakdown:
    return SceneBreakdown(
        items=tuple(item_from_doc(it) for it in doc.get("items", ())),
        source_script_hash=doc.get("source_script_hash", ""),
    )


def report_to_doc(r: ValidationReport) -> dict[str, Any]:
    def viol(v: Violation) -> dict[str, Any]:
        return {"code": v.code, "message": v.message, "block_ids": list(v.block_ids)}

    return {"errors": [viol(v) for v in r.errors], "warnings": [viol(v) for v in r.warnings], "valid": r.valid}


def edit_from_doc(doc: Mapping[str, Any], timeline: Timeline) -> Edit:
    """Parse an edit document. ``update_args`` and ``insert`` need the
    timeline to resolve the argument type from the target block's kind."""
    op = doc.get("op")
    if op == "retime":
        return RetimeEdit(block_id=doc["block_id"], start_time=doc["start_time"], end_time=doc["end_time"])
    if op == "reorder":
        return ReorderEdit(block_id=doc["block_id"], index=doc["index"])
    if op == "delete":
        return DeleteEdit(block_id=doc["block_id"])
    if op == "update_args":
        block = timeline.block(doc["block_id"])
        return UpdateArgsEdit(block_id=doc["block_id"], args=args_from_doc(block.kind, doc["args"]))
    if op == "update_style":
        return UpdateStyleEdit(block_id=doc["block_id"], style=style_from_doc(doc["style"]))
    if op == "insert":
        return InsertEdit(block=block_from_doc(doc["block"]), index=doc.get("index"))
    raise InvariantError(f"unknown edit op {op!r}")
