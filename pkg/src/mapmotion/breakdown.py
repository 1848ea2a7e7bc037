"""Scene breakdown agent and timeline compilation.

The agent turns a narration script into an ordered list of breakdown
items (kind, short and long description, initial parameters) through a
single function-calling chat request, with a bounded repair loop when the
response fails validation. Compilation into a timed block sequence is
deterministic engine post-processing with no LLM involvement: the model
proposes content and durations, the engine owns final placement so the
no-overlap guarantee actually holds.
"""

from __future__ import annotations

import re
from typing import Any, Mapping, Optional, Sequence, Union

from pydantic import Field

from .canonical import canonical_json, text_hash
from .errors import (
    BreakdownFailedError,
    CompileBlockedError,
    InvariantError,
    MissingToolCallError,
    SchemaViolationError,
)
from .gateway import ChatMessage, ChatRequest, Gateway, Role, ToolSchema, parse_tool_call
from .model import (
    AnimationBlock,
    BlockKind,
    Frozen,
    SceneBreakdown,
    SceneBreakdownItem,
    Timeline,
    is_camera,
    validate_timeline,
)
from .prompts import BREAKDOWN_REGENERATE_INSTRUCTIONS, BREAKDOWN_SYSTEM_PROMPT

MAX_REPAIR_PROMPTS = 2


class BreakdownOptions(Frozen):
    target_duration: float = Field(default=30.0, gt=0)
    default_block_seconds: float = Field(default=4.0, gt=0)
    camera_lead_seconds: float = Field(default=0.5, gt=0)


EMIT_BREAKDOWN = ToolSchema(
    name="emit_breakdown",
    description="Emit the complete ordered scene breakdown.",
    parameters={
        "type": "object",
        "properties": {
            "items": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "id": {"type": "string", "default": ""},
                        "kind": {"type": "string", "enum": [k.value for k in BlockKind]},
                        "short_description": {"type": "string"},
                        "long_description": {"type": "string"},
                    },
                    "required": ["kind", "short_description", "long_description"],
                },
            }
        },
        "required": ["items"],
    },
)


# ---------------------------------------------------------------------------
# Item edits (human-in-the-loop before regeneration)
# ---------------------------------------------------------------------------


class ItemDelete(Frozen):
    op: str = "delete"
    id: str


class ItemUpdate(Frozen):
    op: str = "update"
    id: str
    short_description: Optional[str] = None
    long_description: Optional[str] = None
    user_notes: Optional[str] = None


class ItemReorder(Frozen):
    op: str = "reorder"
    id: str
    index: int


class ItemInsert(Frozen):
    op: str = "insert"
    kind: BlockKind
    short_description: str
    long_description: str = ""
    index: Optional[int] = None


ItemEdit = Union[ItemDelete, ItemUpdate, ItemReorder, ItemInsert]


def apply_item_edits(breakdown: SceneBreakdown, edits: Sequence[ItemEdit]) -> SceneBreakdown:
    items = list(breakdown.items)
    counter = _next_counter(it.id for it in items)
    for edit in edits:
        if isinstance(edit, ItemDelete):
            items = [it for it in items if it.id != edit.id]
        elif isinstance(edit, ItemUpdate):
            idx = _find(items, edit.id)
            updates: dict[str, Any] = {}
            if edit.short_description is not None:
                updates["short_description"] = edit.short_description
            if edit.long_description is not None:
                updates["long_description"] = edit.long_description
                updates["resolved"] = False
                updates["resolved_args"] = None
            if edit.user_notes is not None:
                updates["user_notes"] = edit.user_notes
            items[idx] = items[idx].model_copy(update=updates)
        elif isinstance(edit, ItemReorder):
            idx = _find(items, edit.id)
            if not 0 <= edit.index < len(items):
                raise InvariantError(f"reorder index {edit.index} out of range")
            items.insert(edit.index, items.pop(idx))
        elif isinstance(edit, ItemInsert):
            item = SceneBreakdownItem(
                id=f"b{counter:04d}",
                kind=edit.kind,
                short_description=edit.short_description,
                long_description=edit.long_description,
            )
            counter += 1
            index = len(items) if edit.index is None else edit.index
            if not 0 <= index <= len(items):
                raise InvariantError(f"insert index {index} out of range")
            items.insert(index, item)
        else:  # pragma: no cover
            raise InvariantError(f"unknown item edit {edit!r}")
    return SceneBreakdown(items=tuple(items), source_script_hash=breakdown.source_script_hash)


def _find(items: list[SceneBreakdownItem], item_id: str) -> int:
    for i, it in enumerate(items):
        if it.id == item_id:
            return i
    raise InvariantError(f"no breakdown item with id {item_id}")


def _next_counter(ids) -> int:
    best = 0
    for item_id in ids:
        m = re.fullmatch(r"b(\d+)", item_id)
        if m:
            best = max(best, int(m.group(1)))
    return best + 1


# ---------------------------------------------------------------------------
# Agent
# ---------------------------------------------------------------------------


class BreakdownAgent:
    """Stateless orchestration over the gateway; each call owns its own
    chat exchange, so multiple breakdowns may run concurrently."""

    def __init__(self, gateway: Gateway, model_id: str | None = None):
        self.gateway = gateway
        self.model_id = model_id or gateway.config.model_for("breakdown")

    def breakdown(self, script: str, opts: BreakdownOptions | None = None) -> SceneBreakdown:
        if not script.strip():
            raise InvariantError("script is empty; nothing to break down")
        messages = [
            ChatMessage(role=Role.system, content=BREAKDOWN_SYSTEM_PROMPT),
            ChatMessage(role=Role.user, content=script),
        ]
        items = self._request_items(messages, known_ids=(), forbidden_ids=frozenset(), noted_kinds={})
        return SceneBreakdown(items=tuple(items), source_script_hash=text_hash(script))

    def regenerate(
        self, breakdown: SceneBreakdown, edits: Sequence[ItemEdit], script: str
    ) -> SceneBreakdown:
        if breakdown.source_script_hash != text_hash(script):
            raise InvariantError("breakdown was generated from a different script (hash mismatch)")
        edited = apply_item_edits(breakdown, edits)
        deleted_ids = frozenset(it.id for it in breakdown.items) - {it.id for it in edited.items}
        noted_kinds = {it.id: it.kind for it in edited.items if it.user_notes.strip()}

        listing = canonical_json(
            [
                {
                    "id": it.id,
                    "kind": it.kind.value,
                    "short_description": it.short_description,
                    "long_description": it.long_description,
                    "user_notes": it.user_notes,
                }
                for it in edited.items
            ]
        )
        messages = [
            ChatMessage(role=Role.system, content=BREAKDOWN_SYSTEM_PROMPT),
            ChatMessage(
                role=Role.user,
                content=f"Script:\n{script}\n\n{BREAKDOWN_REGENERATE_INSTRUCTIONS}\n\nCurrent items:\n{listing}",
            ),
        ]
        known_ids = tuple(it.id for it in edited.items)
        items = self._request_items(messages, known_ids, deleted_ids, noted_kinds)

        notes_by_id = {it.id: it.user_notes for it in edited.items}
        items = [
            it.model_copy(update={"user_notes": notes_by_id[it.id]}) if it.id in notes_by_id else it
            for it in items
        ]
        return SceneBreakdown(items=tuple(items), source_script_hash=breakdown.source_script_hash)

    # -- internals ------------------------------------------------------

    def _request_items(
        self,
        messages: list[ChatMessage],
        known_ids: tuple[str, ...],
        forbidden_ids: frozenset[str],
        noted_kinds: Mapping[str, BlockKind],
    ) -> list[SceneBreakdownItem]:
        last_raw = ""
        for attempt in range(1 + MAX_REPAIR_PROMPTS):
            request = ChatRequest(
                model_id=self.model_id,
                messages=tuple(messages),
                tools=(EMIT_BREAKDOWN,),
                temperature=0.0,
            )
            response = self.gateway.complete(request, agent="breakdown")
            last_raw = response.text or canonical_json([
                {"name": tc.name, "arguments": tc.arguments} for tc in response.tool_calls
            ])
            try:
                args = parse_tool_call(response, EMIT_BREAKDOWN)
                return self._build_items(args["items"], known_ids, forbidden_ids, noted_kinds)
            except (SchemaViolationError, MissingToolCallError, InvariantError) as exc:
                if attempt == MAX_REPAIR_PROMPTS:
                    raise BreakdownFailedError(
                        f"breakdown failed after {MAX_REPAIR_PROMPTS} repair prompts: {exc}", raw=last_raw
                    ) from exc
                messages = messages + [
                    ChatMessage(role=Role.assistant, content=last_raw),
                    ChatMessage(
                        role=Role.user,
                        content=(
                            f"The previous emit_breakdown call failed validation: {exc}. "
                            "Call emit_breakdown again with a corrected item list."
                        ),
                    ),
                ]
        raise AssertionError("unreachable")  # pragma: no cover

    def _build_items(
        self,
        raw_items: list[dict[str, Any]],
        known_ids: tuple[str, ...],
        forbidden_ids: frozenset[str],
        noted_kinds: Mapping[str, BlockKind],
    ) -> list[SceneBreakdownItem]:
        if not raw_items:
            raise InvariantError("breakdown item list is empty")
        counter = _next_counter(known_ids)
        items: list[SceneBreakdownItem] = []
        used: set[str] = set()
        for raw in raw_items:
            short = raw["short_description"].strip()
            long = raw["long_description"].strip()
            if not short or not long:
                raise InvariantError("every item needs a non-empty short and long description")
            echoed = raw.get("id", "")
            if echoed in forbidden_ids:
                raise InvariantError(f"item {echoed} was deleted by the user and must not come back")
            if echoed and echoed in known_ids and echoed not in used:
                item_id = echoed
            else:
                item_id = f"b{counter:04d}"
                counter += 1
            used.add(item_id)
            kind = BlockKind(raw["kind"])
            if echoed in noted_kinds and noted_kinds[echoed] is not kind:
                raise InvariantError(
                    f"item {echoed} carries user notes; its kind must stay {noted_kinds[echoed].value}"
                )
            items.append(
                SceneBreakdownItem(id=item_id, kind=kind, short_description=short, long_description=long)
            )
        missing_noted = [item_id for item_id in noted_kinds if item_id not in used]
        if missing_noted:
            raise InvariantError(f"items with user notes must survive regeneration: {missing_noted}")
        return items


# ---------------------------------------------------------------------------
# Compilation (pure, no LLM)
# ---------------------------------------------------------------------------

_DURATION_HINT = re.compile(r"\b(\d+(?:\.\d+)?)\s*(?:seconds?|secs?)\b", re.IGNORECASE)


def proposed_seconds(long_description: str) -> float | None:
    """Duration hint in an item's long description ("about 6 seconds"),
    honored as a per-item weight before uniform scaling."""
    m = _DURATION_HINT.search(long_description)
    if not m:
        return None
    value = float(m.group(1))
    return value if value > 0 else None


def compile_timeline(breakdown: SceneBreakdown, opts: BreakdownOptions | None = None) -> Timeline:
    """Deterministic scheduling: non-camera blocks laid end to end in item
    order, uniformly scaled to the target duration; each camera block opens
    camera_lead_seconds before its following non-camera block and spans to
    that block's end (consecutive cameras truncate at the next camera's
    start so cameras never overlap each other)."""
    opts = opts or BreakdownOptions()
    for it in breakdown.items:
        if not it.resolved or it.resolved_args is None:
            raise CompileBlockedError(it.id)

    spans: dict[str, tuple[float, float]] = {}
    order: list[SceneBreakdownItem] = list(breakdown.items)
    cursor = 0.0
    pending: list[tuple[SceneBreakdownItem, float]] = []
    for it in order:
        if is_camera(it.kind):
            pending.append((it, cursor))
            cursor += opts.camera_lead_seconds
        else:
            duration = proposed_seconds(it.long_description) or opts.default_block_seconds
            start, end = cursor, cursor + duration
            spans[it.id] = (start, end)
            cursor = end
            for i, (cam, cam_start) in enumerate(pending):
                cam_end = pending[i + 1][1] if i + 1 < len(pending) else end
                spans[cam.id] = (cam_start, cam_end)
            pending = []
    for i, (cam, cam_start) in enumerate(pending):
        cam_end = pending[i + 1][1] if i + 1 < len(pending) else cam_start + opts.default_block_seconds
        spans[cam.id] = (cam_start, cam_end)

    natural = max((end for _, end in spans.values()), default=0.0)
    scale = opts.target_duration / natural if natural > 0 and abs(natural - opts.target_duration) > 1e-9 else 1.0

    blocks = tuple(
        AnimationBlock(
            id=it.id,
            kind=it.kind,
            start_time=spans[it.id][0] * scale,
            end_time=spans[it.id][1] * scale,
            args=it.resolved_args,
        )
        for it in order
    )
    timeline = Timeline(blocks=blocks)
    report = validate_timeline(timeline)
    if report.errors:  # the scheduler guarantees this never fires
        raise InvariantError(f"compiled timeline failed validation: {report.errors[0].message}")
    return timeline
