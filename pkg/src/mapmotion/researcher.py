"""Per-block geospatial researcher.

A dedicated research exchange is run for each breakdown item: the model
sees a block-kind-specific system prompt, can access exactly one tool
(resolve_geojson), and must pick one of four geospatial actions — direct
query, addition (boundary union), reduction (boundary difference), or
generation (waypoints the model proposes). The engine, not the model,
executes the chosen action against the geocoder and geometry code, so a
hallucinated action cannot do more than fail validation.

Failures re-prompt once with the failure text; a second failure stores the
session unresolved with the error attached and hands control back to the
human.
"""

from __future__ import annotations

import enum
import hashlib
import math
from typing import Any, Mapping, Optional, Sequence, Union

from pydantic import Field

from . import geometry
from .errors import (
    ActionFailedError,
    EngineError,
    InvariantError,
    MissingToolCallError,
    SchemaViolationError,
)
from .gateway import ChatMessage, ChatRequest, Gateway, Role, ToolSchema, parse_tool_call
from .geocoder import (
    GeocodeRequest,
    NominatimClient,
    pick_best,
    request_from_doc,
    request_to_doc,
)
from .model import (
    BlockArgs,
    BlockKind,
    BoundingBox,
    CameraOrbitArgs,
    CameraTranslateArgs,
    CameraZoomArgs,
    ElementAuxiliaryMotionArgs,
    ElementRouteArgs,
    ElementSpatialTransitionArgs,
    Frozen,
    GeoPoint,
    GeoShape,
    HighlightAreaArgs,
    HighlightLineArgs,
    HighlightPointArgs,
    SceneBreakdown,
    SceneBreakdownItem,
    ShapeKind,
    point_from_doc,
    point_to_doc,
    shape_from_geojson,
    shape_to_geojson,
)
from .prompts import researcher_system_prompt

MAX_GENERATION_HOP_KM = 2000.0


class GenerationMode(str, enum.Enum):
    sea = "sea"
    air = "air"
    land = "land"


class QueryAction(Frozen):
    action: str = "query"
    request: GeocodeRequest


class AdditionAction(Frozen):
    action: str = "addition"
    sub_queries: tuple[GeocodeRequest, ...] = Field(min_length=2)


class ReductionAction(Frozen):
    action: str = "reduction"
    base: GeocodeRequest
    mask: GeocodeRequest


class GenerationAction(Frozen):
    action: str = "generation"
    waypoints: tuple[GeoPoint, ...] = Field(min_length=2)
    mode: GenerationMode = GenerationMode.land


GeoAction = Union[QueryAction, AdditionAction, ReductionAction, GenerationAction]


class ResearchSession(Frozen):
    block_id: str
    messages: tuple[ChatMessage, ...] = ()
    chosen_action: Optional[GeoAction] = None
    resolved_shape: Optional[GeoShape] = None
    resolved_to_shape: Optional[GeoShape] = None
    resolved_params: dict[str, str] = Field(default_factory=dict)
    citations: tuple[str, ...] = ()
    error: Optional[str] = None


RESOLVE_GEOJSON = ToolSchema(
    name="resolve_geojson",
    description="Resolve this animation block's geospatial payload and presentation parameters.",
    parameters={
        "type": "object",
        "properties": {
            "action": {"type": "string", "enum": ["query", "addition", "reduction", "generation"]},
            "query": {"type": "string", "default": ""},
            "country_codes": {"type": "array", "items": {"type": "string"}, "default": []},
            "viewbox": {"type": "array", "items": {"type": "number"}, "default": []},
            "bounded": {"type": "boolean", "default": False},
            "sub_queries": {"type": "array", "items": {"type": "string"}, "default": []},
            "base_query": {"type": "string", "default": ""},
            "mask_query": {"type": "string", "default": ""},
            "waypoints": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "number"}},
                "default": [],
            },
            "mode": {"type": "string", "enum": ["sea", "air", "land"], "default": "land"},
            "to_query": {"type": "string", "default": ""},
            "to_sub_queries": {"type": "array", "items": {"type": "string"}, "default": []},
            "params": {"type": "object", "default": {}},
            "citations": {"type": "array", "items": {"type": "string"}, "default": []},
        },
        "required": ["action"],
    },
)

_WANT_POLYGON = {
    BlockKind.highlight_area: True,
    BlockKind.highlight_line: True,
    BlockKind.highlight_point: False,
    BlockKind.camera_zoom: False,
    BlockKind.camera_translate: False,
    BlockKind.camera_orbit: False,
    BlockKind.element_route: True,
    BlockKind.element_spatial_transition: True,
    BlockKind.element_auxiliary_motion: True,
}


# ---------------------------------------------------------------------------
# Action construction and execution
# ---------------------------------------------------------------------------


def _geocode_request(kind: BlockKind, args: Mapping[str, Any], query: str) -> GeocodeRequest:
    if not query.strip():
        raise ActionFailedError("geocode query text is empty", failing_query=query)
    codes = tuple(c.lower() for c in args.get("country_codes", [])) or None
    viewbox = None
    vb = args.get("viewbox", [])
    if vb:
        if len(vb) != 4:
            raise ActionFailedError("viewbox needs exactly 4 numbers (lon1,lat1,lon2,lat2)")
        viewbox = BoundingBox(
            min=GeoPoint(lat=min(vb[1], vb[3]), lon=min(vb[0], vb[2])),
            max=GeoPoint(lat=max(vb[1], vb[3]), lon=max(vb[0], vb[2])),
        )
    return GeocodeRequest(
        query=query.strip(),
        country_codes=codes,
        viewbox=viewbox,
        bounded=bool(args.get("bounded", False)),
        want_polygon=_WANT_POLYGON[kind],
    )


def action_from_args(kind: BlockKind, args: Mapping[str, Any]) -> tuple[GeoAction, Optional[GeoAction]]:
    """Build the typed action (plus the optional secondary action used by
    spatial transitions) from validated tool-call arguments."""
    name = args["action"]
    if name == "query":
        action: GeoAction = QueryAction(request=_geocode_request(kind, args, args.get("query", "")))
    elif name == "addition":
        subs = [s for s in args.get("sub_queries", []) if s.strip()]
        if len(subs) < 2:
            raise ActionFailedError("addition needs at least two sub-queries")
        action = AdditionAction(sub_queries=tuple(_geocode_request(kind, {}, s) for s in subs))
    elif name == "reduction":
        action = ReductionAction(
            base=_geocode_request(kind, {}, args.get("base_query", "")),
            mask=_geocode_request(kind, {}, args.get("mask_query", "")),
        )
    elif name == "generation":
        raw_points = args.get("waypoints", [])
        if len(raw_points) < 2:
            raise ActionFailedError("generation needs at least two waypoints")
        waypoints = []
        for i, pair in enumerate(raw_points):
            if len(pair) != 2:
                raise ActionFailedError(f"waypoint {i} must be a [lat, lon] pair")
            try:
                waypoints.append(GeoPoint(lat=pair[0], lon=pair[1]))
            except Exception as exc:
                raise ActionFailedError(f"waypoint {i} out of coordinate range: {exc}") from exc
        action = GenerationAction(waypoints=tuple(waypoints), mode=GenerationMode(args.get("mode", "land")))
    else:  # pragma: no cover - schema enum prevents this
        raise ActionFailedError(f"unknown action {name!r}")

    secondary: Optional[GeoAction] = None
    if args.get("to_query", "").strip():
        secondary = QueryAction(request=_geocode_request(kind, {}, args["to_query"]))
    elif args.get("to_sub_queries"):
        subs = [s for s in args["to_sub_queries"] if s.strip()]
        if len(subs) < 2:
            raise ActionFailedError("to_sub_queries needs at least two entries")
        secondary = AdditionAction(sub_queries=tuple(_geocode_request(kind, {}, s) for s in subs))
    return action, secondary


def _resolve_one(req: GeocodeRequest, geocoder: NominatimClient) -> tuple[GeoShape, str]:
    results = geocoder.geocode(req)
    best = pick_best(results)
    if best is None:
        raise ActionFailedError(f"geocoding found nothing for {req.query!r}", failing_query=req.query)
    provenance = f"nominatim:{best.osm_type}/{best.osm_id} {best.display_name}".strip()
    return best.shape, provenance


def execute_action(action: GeoAction, geocoder: NominatimClient) -> tuple[GeoShape, list[str]]:
    """Run the chosen action against the geocoder and geometry engine.
    Empty results are errors, never silently attached."""
    if isinstance(action, QueryAction):
        shape, provenance = _resolve_one(action.request, geocoder)
        return shape, [provenance]
    if isinstance(action, AdditionAction):
        shapes = []
        citations = []
        for req in action.sub_queries:
            shape, provenance = _resolve_one(req, geocoder)
            shapes.append(shape)
            citations.append(provenance)
        return geometry.union(shapes), citations
    if isinstance(action, ReductionAction):
        base_shape, base_prov = _resolve_one(action.base, geocoder)
        mask_shape, mask_prov = _resolve_one(action.mask, geocoder)
        result = geometry.difference(base_shape, mask_shape)
        if result.is_empty or geometry.area_km2(result) <= 1e-9:
            raise ActionFailedError(
                f"reduction of {action.base.query!r} by {action.mask.query!r} left nothing",
                failing_query=action.mask.query,
            )
        return result, [base_prov, f"reduced by {mask_prov}"]
    if isinstance(action, GenerationAction):
        for i in range(1, len(action.waypoints)):
            hop = geometry.haversine_km(action.waypoints[i - 1], action.waypoints[i])
            if hop >= MAX_GENERATION_HOP_KM:
                raise ActionFailedError(
                    f"waypoint hop {i} spans {hop:.0f} km, over the {MAX_GENERATION_HOP_KM:.0f} km limit",
                    hop_index=i,
                )
        shape = GeoShape.from_path(list(action.waypoints))
        return shape, [f"generated:{action.mode.value}-route:{len(action.waypoints)} waypoints"]
    raise ActionFailedError(f"unknown action {action!r}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Parameter mapping onto block arguments
# ---------------------------------------------------------------------------


def _param_str(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _params_map(raw: Mapping[str, Any]) -> dict[str, str]:
    return {str(k): _param_str(v) for k, v in raw.items()}


def _param_float(params: Mapping[str, str], key: str) -> float | None:
    if key not in params:
        return None
    try:
        return float(params[key])
    except ValueError as exc:
        raise ActionFailedError(f"parameter {key}={params[key]!r} is not a number") from exc


def zoom_for_extent(box: BoundingBox) -> float:
    """Zoom level that frames a bounding box; a degenerate (point) box gets
    a landmark-scale default."""
    mid_lat = math.radians((box.min.lat + box.max.lat) / 2.0)
    span = max(box.max.lat - box.min.lat, (box.max.lon - box.min.lon) * max(0.1, math.cos(mid_lat)))
    if span <= 0:
        return 12.0
    return max(0.0, min(22.0, math.log2(360.0 / span)))


def _focus_point(shape: GeoShape) -> GeoPoint:
    if shape.kind is ShapeKind.point:
        return shape.point
    _, centroid = geometry.extent(shape)
    return centroid


def _stable_seed(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


def build_block_args(
    kind: BlockKind,
    shape: GeoShape,
    params: Mapping[str, str],
    to_shape: GeoShape | None = None,
    item_id: str = "",
) -> BlockArgs:
    """Deterministically map a resolved shape plus selected parameters onto
    the block's typed arguments."""
    if kind is BlockKind.highlight_area:
        if shape.kind not in (ShapeKind.polygon, ShapeKind.multipolygon):
            raise ActionFailedError(f"area highlight needs a polygon, got {shape.kind.value}")
        return HighlightAreaArgs(shape=shape)
    if kind is BlockKind.highlight_line:
        if shape.kind is not ShapeKind.line:
            raise ActionFailedError(f"line highlight needs a line, got {shape.kind.value}")
        return HighlightLineArgs(path=shape)
    if kind is BlockKind.highlight_point:
        return HighlightPointArgs(point=_focus_point(shape))
    if kind is BlockKind.camera_zoom:
        box, _ = geometry.extent(shape)
        zoom = _param_float(params, "zoom_level")
        return CameraZoomArgs(target=_focus_point(shape), zoom_level=zoom if zoom is not None else zoom_for_extent(box))
    if kind is BlockKind.camera_translate:
        if shape.kind is not ShapeKind.line:
            raise ActionFailedError("camera pan needs a line of waypoints (start to end)")
        box, _ = geometry.extent(shape)
        zoom = _param_float(params, "zoom_level")
        return CameraTranslateArgs(
            from_point=shape.path[0],
            to_point=shape.path[-1],
            zoom_level=zoom if zoom is not None else zoom_for_extent(box),
        )
    if kind is BlockKind.camera_orbit:
        box, _ = geometry.extent(shape)
        zoom = _param_float(params, "zoom_level")
        sweep = _param_float(params, "sweep")
        direction = params.get("direction", "ccw")
        if direction not in ("cw", "ccw"):
            raise ActionFailedError(f"orbit direction must be cw or ccw, got {direction!r}")
        return CameraOrbitArgs(
            center=_focus_point(shape),
            zoom_level=zoom if zoom is not None else zoom_for_extent(box),
            sweep=sweep if sweep not in (None, 0.0) else 360.0,
            direction=direction,
            start_bearing=_param_float(params, "start_bearing"),
        )
    if kind is BlockKind.element_route:
        if shape.kind is not ShapeKind.line:
            raise ActionFailedError(f"route needs a line, got {shape.kind.value}")
        return ElementRouteArgs(path=shape, sprite=params.get("sprite"))
    if kind is BlockKind.element_spatial_transition:
        if to_shape is None:
            raise ActionFailedError("spatial transition needs a to_query or to_sub_queries for the target shape")
        for s, label in ((shape, "from"), (to_shape, "to")):
            if s.kind not in (ShapeKind.polygon, ShapeKind.multipolygon):
                raise ActionFailedError(f"spatial transition {label} shape must be a polygon")
        return ElementSpatialTransitionArgs(from_shape=shape, to_shape=to_shape)
    if kind is BlockKind.element_auxiliary_motion:
        box, _ = geometry.extent(shape)
        if box.min == box.max:
            pad = 0.5
            box = BoundingBox(
                min=GeoPoint(lat=max(-90, box.min.lat - pad), lon=max(-180, box.min.lon - pad)),
                max=GeoPoint(lat=min(90, box.max.lat + pad), lon=min(180, box.max.lon + pad)),
            )
        count = _param_float(params, "cluster_count")
        seed = _param_float(params, "seed")
        return ElementAuxiliaryMotionArgs(
            region=box,
            cluster_count=int(count) if count else 3,
            sprite=params.get("sprite"),
            seed=int(seed) if seed is not None else _stable_seed(item_id),
        )
    raise ActionFailedError(f"unknown block kind {kind!r}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Researcher orchestration
# ---------------------------------------------------------------------------


class Researcher:
    """Blocks research independently; a single session processes one
    message at a time."""

    def __init__(self, gateway: Gateway, geocoder: NominatimClient, model_id: str | None = None):
        self.gateway = gateway
        self.geocoder = geocoder
        self.model_id = model_id or gateway.config.model_for("researcher")

    def research_block(
        self, item: SceneBreakdownItem, context: SceneBreakdown
    ) -> tuple[SceneBreakdownItem, ResearchSession]:
        if not item.long_description.strip():
            raise InvariantError(f"item {item.id} has no long description to research")
        scene_lines = "\n".join(
            f"{i + 1}. [{it.kind.value}] {it.short_description}" for i, it in enumerate(context.items)
        )
        user = (
            f"Block kind: {item.kind.value}\n"
            f"Short description: {item.short_description}\n"
            f"Long description: {item.long_description}\n"
            + (f"User notes: {item.user_notes}\n" if item.user_notes.strip() else "")
            + f"Scene context:\n{scene_lines}"
        )
        messages = [
            ChatMessage(role=Role.system, content=researcher_system_prompt(item.kind)),
            ChatMessage(role=Role.user, content=user),
        ]
        outcome = self._exchange(messages, item)
        if outcome.error is not None:
            session = ResearchSession(
                block_id=item.id, messages=tuple(outcome.messages), error=outcome.error
            )
            return item, session

        session = ResearchSession(
            block_id=item.id,
            messages=tuple(outcome.messages),
            chosen_action=outcome.action,
            resolved_shape=outcome.shape,
            resolved_to_shape=outcome.to_shape,
            resolved_params=outcome.params,
            citations=tuple(outcome.citations),
        )
        updated = item.model_copy(update={"resolved": True, "resolved_args": outcome.args})
        return updated, session

    def chat(
        self, session: ResearchSession, message: str, item: SceneBreakdownItem
    ) -> tuple[str, Optional[tuple[GeoShape, dict[str, str]]], ResearchSession]:
        """Follow-up turn: the model may answer informationally (reply
        only) or emit another resolve_geojson call, which replaces the
        session's resolved shape and params. History is append-only."""
        if not message.strip():
            raise InvariantError("chat message is empty")
        messages = list(session.messages) + [ChatMessage(role=Role.user, content=message)]
        request = ChatRequest(
            model_id=self.model_id, messages=tuple(messages), tools=(RESOLVE_GEOJSON,), temperature=0.0
        )
        response = self.gateway.complete(request, agent="researcher")

        if not any(tc.name == RESOLVE_GEOJSON.name for tc in response.tool_calls):
            reply = response.text or ""
            new_session = session.model_copy(
                update={"messages": tuple(messages + [ChatMessage(role=Role.assistant, content=reply)])}
            )
            return reply, None, new_session

        outcome = self._exchange(messages, item, first_response=response)
        if outcome.error is not None:
            new_session = session.model_copy(
                update={"messages": tuple(outcome.messages), "error": outcome.error}
            )
            return f"Resolution failed: {outcome.error}", None, new_session

        new_session = session.model_copy(
            update={
                "messages": tuple(outcome.messages),
                "chosen_action": outcome.action,
                "resolved_shape": outcome.shape,
                "resolved_to_shape": outcome.to_shape,
                "resolved_params": outcome.params,
                "citations": tuple(session.citations) + tuple(outcome.citations),
                "error": None,
            }
        )
        reply = outcome.reply or "Updated the resolved geometry."
        return reply, (outcome.shape, outcome.params), new_session

    # -- internals ------------------------------------------------------

    class _Outcome:
        def __init__(self):
            self.messages: list[ChatMessage] = []
            self.action: Optional[GeoAction] = None
            self.shape: Optional[GeoShape] = None
            self.to_shape: Optional[GeoShape] = None
            self.params: dict[str, str] = {}
            self.citations: list[str] = []
            self.args: Optional[BlockArgs] = None
            self.reply: Optional[str] = None
            self.error: Optional[str] = None

    def _exchange(self, messages: list[ChatMessage], item: SceneBreakdownItem, first_response=None):
        """One resolve attempt plus at most one repair re-prompt."""
        outcome = self._Outcome()
        response = first_response
        for attempt in range(2):
            if response is None:
                request = ChatRequest(
                    model_id=self.model_id,
                    messages=tuple(messages),
                    tools=(RESOLVE_GEOJSON,),
                    temperature=0.0,
                )
                response = self.gateway.complete(request, agent="researcher")
            assistant_text = response.text or ""
            try:
                tool_args = parse_tool_call(response, RESOLVE_GEOJSON)
                action, secondary = action_from_args(item.kind, tool_args)
                shape, citations = execute_action(action, self.geocoder)
                geometry_ok(shape)
                to_shape = None
                if secondary is not None:
                    to_shape, extra = execute_action(secondary, self.geocoder)
                    geometry_ok(to_shape)
                    citations = citations + extra
                params = _params_map(tool_args.get("params", {}))
                args = build_block_args(item.kind, shape, params, to_shape, item_id=item.id)
                outcome.messages = messages + [
                    ChatMessage(role=Role.assistant, content=assistant_text or _action_summary(action))
                ]
                outcome.action = action
                outcome.shape = shape
                outcome.to_shape = to_shape
                outcome.params = params
                outcome.citations = citations + [str(c) for c in tool_args.get("citations", [])]
                outcome.args = args
                outcome.reply = response.text
                return outcome
            except (SchemaViolationError, MissingToolCallError, ActionFailedError, EngineError) as exc:
                failure = str(exc)
                messages = messages + [
                    ChatMessage(role=Role.assistant, content=assistant_text or failure),
                    ChatMessage(
                        role=Role.user,
                        content=(
                            f"That resolution failed: {failure}. "
                            "Call resolve_geojson again with corrected arguments."
                        ),
                    ),
                ]
                response = None
                if attempt == 1:
                    outcome.messages = messages
                    outcome.error = failure
                    return outcome
        raise AssertionError("unreachable")  # pragma: no cover


def geometry_ok(shape: GeoShape) -> None:
    """Validity gate every resolved shape passes before being attached."""
    if shape.is_empty:
        raise ActionFailedError("resolved shape is empty")
    if shape.kind in (ShapeKind.polygon, ShapeKind.multipolygon):
        geometry.area_km2(shape)  # raises on open rings / antimeridian
    else:
        geometry.extent(shape)


def _action_summary(action: GeoAction) -> str:
    if isinstance(action, QueryAction):
        return f"resolve_geojson: query {action.request.query!r}"
    if isinstance(action, AdditionAction):
        return "resolve_geojson: addition of " + ", ".join(repr(r.query) for r in action.sub_queries)
    if isinstance(action, ReductionAction):
        return f"resolve_geojson: reduction {action.base.query!r} minus {action.mask.query!r}"
    return f"resolve_geojson: generated {len(action.waypoints)}-waypoint {action.mode.value} route"


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


def action_to_doc(action: GeoAction) -> dict[str, Any]:
    if isinstance(action, QueryAction):
        return {"action": "query", "request": request_to_doc(action.request)}
    if isinstance(action, AdditionAction):
        return {"action": "addition", "sub_queries": [request_to_doc(r) for r in action.sub_queries]}
    if isinstance(action, ReductionAction):
        return {"action": "reduction", "base": request_to_doc(action.base), "mask": request_to_doc(action.mask)}
    return {
        "action": "generation",
        "waypoints": [point_to_doc(p) for p in action.waypoints],
        "mode": action.mode.value,
    }


def action_from_doc(doc: Mapping[str, Any]) -> GeoAction:
    name = doc["action"]
    if name == "query":
        return QueryAction(request=request_from_doc(doc["request"]))
    if name == "addition":
        return AdditionAction(sub_queries=tuple(request_from_doc(r) for r in doc["sub_queries"]))
    if name == "reduction":
        return ReductionAction(base=request_from_doc(doc["base"]), mask=request_from_doc(doc["mask"]))
    if name == "generation":
        return GenerationAction(
            waypoints=tuple(point_from_doc(p) for p in doc["waypoints"]),
            mode=GenerationMode(doc.get("mode", "land")),
        )
    raise InvariantError(f"unknown action {name!r}")


def session_to_doc(session: ResearchSession) -> dict[str, Any]:
    return {
        "block_id": session.block_id,
        "messages": [{"role": m.role.value, "content": m.content} for m in session.messages],
        "chosen_action": None if session.chosen_action is None else action_to_doc(session.chosen_action),
        "resolved_shape": None if session.resolved_shape is None else shape_to_geojson(session.resolved_shape),
        "resolved_to_shape": None
        if session.resolved_to_shape is None
        else shape_to_geojson(session.resolved_to_shape),
        "resolved_params": dict(session.resolved_params),
        "citations": list(session.citations),
        "error": session.error,
    }


def session_from_doc(doc: Mapping[str, Any]) -> ResearchSession:
    return ResearchSession(
        block_id=doc["block_id"],
        messages=tuple(ChatMessage(role=Role(m["role"]), content=m["content"]) for m in doc.get("messages", ())),
        chosen_action=None if doc.get("chosen_action") is None else action_from_doc(doc["chosen_action"]),
        resolved_shape=None if doc.get("resolved_shape") is None else shape_from_geojson(doc["resolved_shape"]),
        resolved_to_shape=None
        if doc.get("resolved_to_shape") is None
        else shape_from_geojson(doc["resolved_to_shape"]),
        resolved_params={str(k): str(v) for k, v in doc.get("resolved_params", {}).items()},
        citations=tuple(doc.get("citations", ())),
        error=doc.get("error"),
    )
