import json

import pytest

from mapmotion.breakdown import (
    BreakdownAgent,
    BreakdownOptions,
    EMIT_BREAKDOWN,
    ItemDelete,
    ItemReorder,
    ItemUpdate,
    apply_item_edits,
    compile_timeline,
    proposed_seconds,
)
from mapmotion.canonical import canonical_json, text_hash
from mapmotion.errors import BreakdownFailedError, CompileBlockedError, InvariantError
from mapmotion.gateway import ChatResponse, Gateway, GatewayConfig, ToolCall
from mapmotion.model import (
    BlockKind,
    CameraZoomArgs,
    GeoPoint,
    HighlightAreaArgs,
    SceneBreakdown,
    SceneBreakdownItem,
    is_camera,
    timeline_to_doc,
    validate_timeline,
)

from conftest import square


class ScriptedGateway:
    """Stands in for the LLM gateway: pops canned ChatResponses."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.requests = []
        self.config = GatewayConfig(mode="replay")

    def complete(self, request, agent="default"):
        self.requests.append((agent, request))
        return self.responses.pop(0)


def emit(items):
    return ChatResponse(tool_calls=(ToolCall(name="emit_breakdown", arguments={"items": items}),))


def item_payload(kind, short="go somewhere", long="near (43.65, -79.38); query: Toronto", id=""):
    return {"id": id, "kind": kind, "short_description": short, "long_description": long}


def resolved_item(item_id, kind, long=""):
    if is_camera(BlockKind(kind)):
        args = CameraZoomArgs(target=GeoPoint(lat=43.65, lon=-79.38), zoom_level=10.0)
        kind = BlockKind.camera_zoom
    else:
        args = HighlightAreaArgs(shape=square(0, 0))
        kind = BlockKind.highlight_area
    return SceneBreakdownItem(
        id=item_id,
        kind=kind,
        short_description="x",
        long_description=long or "y",
        resolved=True,
        resolved_args=args,
    )


# ---------------------------------------------------------------- breakdown


def test_breakdown_assigns_sortable_ids():
    gw = ScriptedGateway([emit([item_payload("camera_zoom"), item_payload("highlight_area")])])
    agent = BreakdownAgent(gw, model_id="o1")
    bd = agent.breakdown("zoom to Toronto then highlight it")
    assert [it.id for it in bd.items] == ["b0001", "b0002"]
    assert bd.source_script_hash == text_hash("zoom to Toronto then highlight it")
    assert all(not it.resolved for it in bd.items)


def test_breakdown_empty_script_never_calls_gateway():
    gw = ScriptedGateway([])
    agent = BreakdownAgent(gw, model_id="o1")
    with pytest.raises(InvariantError):
        agent.breakdown("   ")
    assert gw.requests == []


def test_breakdown_system_prompt_carries_rules():
    gw = ScriptedGateway([emit([item_payload("camera_zoom")])])
    BreakdownAgent(gw, model_id="o1").breakdown("a script")
    _, request = gw.requests[0]
    prompt = request.messages[0].content
    for kind in BlockKind:
        assert kind.value in prompt
    assert "camera block" in prompt  # precede-with-camera heuristic
    assert "never overlap" in prompt  # succession rule
    assert "may overlap" in prompt  # camera exception
    assert [t.name for t in request.tools] == ["emit_breakdown"]
    assert request.temperature == 0.0


def test_breakdown_repairs_then_succeeds():
    bad = ChatResponse(text="I think the answer is four blocks.")
    gw = ScriptedGateway([bad, emit([item_payload("highlight_area")])])
    bd = BreakdownAgent(gw, model_id="o1").breakdown("script")
    assert len(bd.items) == 1
    assert len(gw.requests) == 2
    repair_message = gw.requests[1][1].messages[-1].content
    assert "failed validation" in repair_message


def test_breakdown_fails_after_two_repairs():
    bad = ChatResponse(text="still words")
    gw = ScriptedGateway([bad, bad, bad])
    with pytest.raises(BreakdownFailedError) as err:
        BreakdownAgent(gw, model_id="o1").breakdown("script")
    assert err.value.raw == "still words"
    assert len(gw.requests) == 3


def test_breakdown_rejects_blank_descriptions():
    gw = ScriptedGateway([emit([item_payload("highlight_area", short="  ")]), emit([item_payload("highlight_area")])])
    bd = BreakdownAgent(gw, model_id="o1").breakdown("script")
    assert bd.items[0].short_description


# ---------------------------------------------------------------- regenerate


def breakdown_fixture():
    return SceneBreakdown(
        items=(
            SceneBreakdownItem(id="b0001", kind=BlockKind.camera_zoom, short_description="zoom", long_description="x"),
            SceneBreakdownItem(id="b0002", kind=BlockKind.element_route, short_description="sail", long_description="y"),
            SceneBreakdownItem(
                id="b0003",
                kind=BlockKind.highlight_area,
                short_description="highlight",
                long_description="z",
                user_notes="keep the city boundary",
            ),
        ),
        source_script_hash=text_hash("the script"),
    )


def test_regenerate_deleted_item_stays_gone():
    bd = breakdown_fixture()
    gw = ScriptedGateway(
        [emit([item_payload("camera_zoom", id="b0001"), item_payload("highlight_area", id="b0003")])]
    )
    out = BreakdownAgent(gw, model_id="o1").regenerate(bd, [ItemDelete(id="b0002")], "the script")
    assert [it.id for it in out.items] == ["b0001", "b0003"]
    # the request listing no longer contains the deleted item
    listing = gw.requests[0][1].messages[-1].content
    assert "b0002" not in listing


def test_regenerate_preserves_reorder():
    bd = breakdown_fixture()
    reordered = [
        item_payload("element_route", id="b0002"),
        item_payload("camera_zoom", id="b0001"),
        item_payload("highlight_area", id="b0003"),
    ]
    gw = ScriptedGateway([emit(reordered)])
    out = BreakdownAgent(gw, model_id="o1").regenerate(bd, [ItemReorder(id="b0002", index=0)], "the script")
    assert [it.id for it in out.items] == ["b0002", "b0001", "b0003"]
    assert out.items[2].user_notes == "keep the city boundary"


def test_regenerate_noted_item_kind_change_triggers_repair():
    bd = breakdown_fixture()
    wrong = emit(
        [
            item_payload("camera_zoom", id="b0001"),
            item_payload("element_route", id="b0002"),
            item_payload("element_route", id="b0003"),  # kind changed on a noted item
        ]
    )
    right = emit(
        [
            item_payload("camera_zoom", id="b0001"),
            item_payload("element_route", id="b0002"),
            item_payload("highlight_area", id="b0003"),
        ]
    )
    gw = ScriptedGateway([wrong, right])
    out = BreakdownAgent(gw, model_id="o1").regenerate(bd, [], "the script")
    assert out.items[2].kind is BlockKind.highlight_area
    assert len(gw.requests) == 2


def test_regenerate_script_hash_enforced():
    bd = breakdown_fixture()
    with pytest.raises(InvariantError):
        BreakdownAgent(ScriptedGateway([]), model_id="o1").regenerate(bd, [], "a different script")


def test_regenerate_new_items_get_fresh_ids():
    bd = breakdown_fixture()
    gw = ScriptedGateway(
        [
            emit(
                [
                    item_payload("camera_zoom", id="b0001"),
                    item_payload("element_route", id="b0002"),
                    item_payload("highlight_area", id="b0003"),
                    item_payload("highlight_point"),
                ]
            )
        ]
    )
    out = BreakdownAgent(gw, model_id="o1").regenerate(bd, [], "the script")
    assert out.items[3].id == "b0004"


def test_apply_item_edits_update_resets_resolution():
    bd = SceneBreakdown(
        items=(resolved_item("b0001", "camera_zoom"),), source_script_hash="h"
    )
    out = apply_item_edits(bd, [ItemUpdate(id="b0001", long_description="zoom level 10")])
    assert not out.items[0].resolved
    assert out.items[0].resolved_args is None


# ---------------------------------------------------------------- compile


def test_compile_two_non_camera_items():
    bd = SceneBreakdown(items=(resolved_item("b0001", "highlight_area"), resolved_item("b0002", "highlight_area")))
    t = compile_timeline(bd, BreakdownOptions(target_duration=8))
    spans = [(b.start_time, b.end_time) for b in t.blocks]
    assert spans == [(0.0, 4.0), (4.0, 8.0)]


def test_compile_camera_lead_layout():
    bd = SceneBreakdown(items=(resolved_item("b0001", "camera_zoom"), resolved_item("b0002", "highlight_area")))
    t = compile_timeline(bd, BreakdownOptions(target_duration=4.5))
    camera = t.block("b0001")
    highlight = t.block("b0002")
    assert (camera.start_time, camera.end_time) == (0.0, 4.5)
    assert (highlight.start_time, highlight.end_time) == (0.5, 4.5)


def test_compile_scales_to_target():
    bd = SceneBreakdown(
        items=(
            resolved_item("b0001", "highlight_area"),
            resolved_item("b0002", "highlight_area"),
            resolved_item("b0003", "highlight_area"),
        )
    )
    t = compile_timeline(bd, BreakdownOptions(target_duration=6))
    spans = [(b.start_time, b.end_time) for b in t.blocks]
    assert spans == [(0.0, 2.0), (2.0, 4.0), (4.0, 6.0)]


def test_compile_blocked_on_unresolved_item():
    bd = SceneBreakdown(
        items=(
            resolved_item("b0001", "highlight_area"),
            SceneBreakdownItem(id="b0002", kind=BlockKind.highlight_area, short_description="x"),
        )
    )
    with pytest.raises(CompileBlockedError) as err:
        compile_timeline(bd)
    assert err.value.item_id == "b0002"


def test_compile_pure_and_validates_clean():
    bd = SceneBreakdown(
        items=(
            resolved_item("b0001", "camera_zoom"),
            resolved_item("b0002", "highlight_area"),
            resolved_item("b0003", "camera_zoom"),
            resolved_item("b0004", "highlight_area"),
        )
    )
    opts = BreakdownOptions(target_duration=30)
    first = compile_timeline(bd, opts)
    second = compile_timeline(bd, opts)
    assert canonical_json(timeline_to_doc(first)) == canonical_json(timeline_to_doc(second))
    report = validate_timeline(first)
    assert not report.errors
    assert first.duration == pytest.approx(30.0)


def test_compile_preserves_non_camera_order():
    bd = SceneBreakdown(
        items=tuple(resolved_item(f"b{i:04d}", "highlight_area") for i in range(1, 6))
    )
    t = compile_timeline(bd)
    starts = [b.start_time for b in t.blocks]
    assert starts == sorted(starts)


def test_compile_duration_hint_used_as_weight():
    bd = SceneBreakdown(
        items=(
            resolved_item("b0001", "highlight_area", long="hold for 8 seconds on the region"),
            resolved_item("b0002", "highlight_area"),
        )
    )
    t = compile_timeline(bd, BreakdownOptions(target_duration=12))
    assert (t.block("b0001").start_time, t.block("b0001").end_time) == (0.0, 8.0)
    assert (t.block("b0002").start_time, t.block("b0002").end_time) == (8.0, 12.0)


def test_proposed_seconds_parsing():
    assert proposed_seconds("linger about 6 seconds") == 6.0
    assert proposed_seconds("6.5 secs then move") == 6.5
    assert proposed_seconds("the 1800s were turbulent") is None
    assert proposed_seconds("zoom level 10") is None


def test_trailing_camera_gets_default_span():
    bd = SceneBreakdown(items=(resolved_item("b0001", "highlight_area"), resolved_item("b0002", "camera_zoom")))
    t = compile_timeline(bd, BreakdownOptions(target_duration=8))
    camera = t.block("b0002")
    assert camera.end_time > camera.start_time
    assert not validate_timeline(t).errors


def test_consecutive_cameras_do_not_overlap():
    bd = SceneBreakdown(
        items=(
            resolved_item("b0001", "camera_zoom"),
            resolved_item("b0002", "camera_zoom"),
            resolved_item("b0003", "highlight_area"),
        )
    )
    t = compile_timeline(bd, BreakdownOptions(target_duration=10))
    assert not validate_timeline(t).errors
