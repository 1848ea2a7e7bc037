"""Application facade wiring the agents, geocoder, sequencer and store.

Both the HTTP service and the CLI drive this one class, so pipeline
behavior (and replay determinism) is identical no matter which interface
invoked it. In replay mode the clock is pinned to epoch zero and project
ids derive from the script hash, making two runs byte-identical.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from .breakdown import BreakdownAgent, BreakdownOptions, ItemEdit, compile_timeline
from .canonical import text_hash
from .errors import InvariantError, NotFoundError
from .gateway import Gateway, GatewayConfig
from .geocoder import (
    FixtureGeocodeTransport,
    HttpGeocodeTransport,
    NominatimClient,
    RecordingGeocodeTransport,
)
from .model import Edit, SceneBreakdown, Timeline, apply_edit
from .project import Clock, Project, fixed_clock, new_project_id, system_clock
from .researcher import Researcher, build_block_args
from .store import ProjectStore


@dataclass(frozen=True)
class EngineConfig:
    mode: str = "replay"
    data_dir: Path = Path("data")
    fixtures_dir: Path = Path("fixtures")

    @classmethod
    def from_env(cls, mode: str | None = None) -> "EngineConfig":
        return cls(
            mode=mode or os.environ.get("LLM_MODE", "replay"),
            data_dir=Path(os.environ.get("DATA_DIR", "data")),
            fixtures_dir=Path(os.environ.get("LLM_FIXTURES_DIR", "fixtures")),
        )


class Engine:
    def __init__(
        self,
        store: ProjectStore,
        gateway: Gateway,
        geocoder: NominatimClient,
        clock: Clock | None = None,
    ):
        self.store = store
        self.gateway = gateway
        self.geocoder = geocoder
        self.clock: Clock = clock or (fixed_clock if gateway.config.mode == "replay" else system_clock)
        self.breakdown_agent = BreakdownAgent(gateway)
        self.researcher = Researcher(gateway, geocoder)

    @classmethod
    def from_config(cls, config: EngineConfig) -> "Engine":
        gateway = Gateway(GatewayConfig.from_env(mode=config.mode, fixtures_dir=str(config.fixtures_dir)))
        geo_fixtures = config.fixtures_dir / "geocoder"
        if config.mode == "replay":
            geocoder = NominatimClient(transport=FixtureGeocodeTransport(geo_fixtures), cache_path=None)
        elif config.mode == "record":
            geocoder = NominatimClient(
                transport=RecordingGeocodeTransport(HttpGeocodeTransport(), geo_fixtures),
                cache_path=config.data_dir / "geocache.jsonl",
            )
        else:
            geocoder = NominatimClient(cache_path=config.data_dir / "geocache.jsonl")
        clock = fixed_clock if config.mode == "replay" else system_clock
        return cls(ProjectStore(config.data_dir), gateway, geocoder, clock)

    # -- pipeline steps (pure over Project values) -----------------------

    def create_project(self, script: str) -> Project:
        now = self.clock()
        return Project(id=new_project_id(script, now), script=script, created=now, modified=now)

    def run_breakdown(self, project: Project, opts: BreakdownOptions | None = None) -> Project:
        breakdown = self.breakdown_agent.breakdown(project.script, opts)
        return project.model_copy(
            update={"breakdown": breakdown, "sessions": {}, "timeline": Timeline(), "modified": self.clock()}
        )

    def regenerate_breakdown(self, project: Project, edits: Sequence[ItemEdit]) -> Project:
        breakdown = self.breakdown_agent.regenerate(project.breakdown, edits, project.script)
        kept = {k: v for k, v in project.sessions.items() if any(it.id == k for it in breakdown.items)}
        return project.model_copy(update={"breakdown": breakdown, "sessions": kept, "modified": self.clock()})

    def research_all(self, project: Project) -> Project:
        self._check_script_hash(project)
        items = []
        sessions = dict(project.sessions)
        for item in project.breakdown.items:
            if item.resolved and item.resolved_args is not None:
                items.append(item)
                continue
            updated, session = self.researcher.research_block(item, project.breakdown)
            items.append(updated)
            sessions[item.id] = session
        breakdown = SceneBreakdown(items=tuple(items), source_script_hash=project.breakdown.source_script_hash)
        return project.model_copy(
            update={"breakdown": breakdown, "sessions": sessions, "modified": self.clock()}
        )

    def compile_project(self, project: Project, opts: BreakdownOptions | None = None) -> Project:
        self._check_script_hash(project)
        timeline = compile_timeline(project.breakdown, opts)
        return project.model_copy(update={"timeline": timeline, "modified": self.clock()})

    def edit_timeline(self, project: Project, edit: Edit) -> Project:
        timeline = apply_edit(project.timeline, edit)
        return project.model_copy(update={"timeline": timeline, "modified": self.clock()})

    def chat(self, project: Project, block_id: str, message: str) -> tuple[str, Optional[dict[str, Any]], Project]:
        session = project.sessions.get(block_id)
        if session is None:
            raise NotFoundError(f"no research session for block {block_id}", {"block_id": block_id})
        item = project.breakdown.item(block_id)
        reply, updated, new_session = self.researcher.chat(session, message, item)
        sessions = dict(project.sessions)
        sessions[block_id] = new_session

        updated_doc: Optional[dict[str, Any]] = None
        new_project = project.model_copy(update={"sessions": sessions, "modified": self.clock()})
        if updated is not None:
            shape, params = updated
            args = build_block_args(item.kind, shape, params, new_session.resolved_to_shape, item_id=item.id)
            items = tuple(
                it.model_copy(update={"resolved": True, "resolved_args": args}) if it.id == block_id else it
                for it in project.breakdown.items
            )
            breakdown = SceneBreakdown(
                items=items, source_script_hash=project.breakdown.source_script_hash
            )
            blocks = tuple(
                b.model_copy(update={"args": args}) if b.id == block_id else b
                for b in project.timeline.blocks
            )
            new_project = new_project.model_copy(
                update={"breakdown": breakdown, "timeline": Timeline(blocks=blocks, map_style=project.timeline.map_style)}
            )
            from .model import shape_to_geojson

            updated_doc = {"shape": shape_to_geojson(shape), "params": dict(params)}
        return reply, updated_doc, new_project

    def _check_script_hash(self, project: Project) -> None:
        if not project.breakdown.items:
            raise InvariantError("project has no scene breakdown yet")
        if project.breakdown.source_script_hash != text_hash(project.script):
            raise InvariantError("scene breakdown was generated from a different script; regenerate it first")


def breakdown_options_from_doc(doc: Mapping[str, Any] | None) -> BreakdownOptions:
    if not doc:
        return BreakdownOptions()
    return BreakdownOptions(
        target_duration=doc.get("target_duration", 30.0),
        default_block_seconds=doc.get("default_block_seconds", 4.0),
        camera_lead_seconds=doc.get("camera_lead_seconds", 0.5),
    )


def item_edits_from_docs(docs: Sequence[Mapping[str, Any]]) -> list[ItemEdit]:
    from .breakdown import ItemDelete, ItemInsert, ItemReorder, ItemUpdate

    out: list[ItemEdit] = []
    for doc in docs:
        op = doc.get("op")
        if op == "delete":
            out.append(ItemDelete(id=doc["id"]))
        elif op == "update":
            out.append(
                ItemUpdate(
                    id=doc["id"],
                    short_description=doc.get("short_description"),
                    long_description=doc.get("long_description"),
                    user_notes=doc.get("user_notes"),
                )
            )
        elif op == "reorder":
            out.append(ItemReorder(id=doc["id"], index=doc["index"]))
        elif op == "insert":
            out.append(
                ItemInsert(
                    kind=doc["kind"],
                    short_description=doc["short_description"],
                    long_description=doc.get("long_description", ""),
                    index=doc.get("index"),
                )
            )
        else:
            raise InvariantError(f"unknown item edit op {op!r}")
    return out
