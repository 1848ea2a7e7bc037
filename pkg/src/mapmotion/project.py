"""Project document: the interchange unit for CLI, service, and UI.

A project bundles the script, its scene breakdown, the compiled timeline,
per-block research sessions, and embedded assets. Serialization is a
single canonical UTF-8 JSON document with GeoJSON-embedded geometry;
serialize -> parse -> serialize is byte-stable.
"""

from __future__ import annotations

import base64
import hashlib
from typing import Any, Callable, Mapping

from pydantic import Field, model_validator

from .canonical import round_time
from .model import (
    Frozen,
    SceneBreakdown,
    Timeline,
    breakdown_from_doc,
    breakdown_to_doc,
    timeline_from_doc,
    timeline_to_doc,
)
from .researcher import ResearchSession, session_from_doc, session_to_doc


class Project(Frozen):
    id: str = Field(min_length=1)
    script: str = ""
    breakdown: SceneBreakdown = SceneBreakdown()
    timeline: Timeline = Timeline()
    sessions: dict[str, ResearchSession] = Field(default_factory=dict)
    assets: dict[str, bytes] = Field(default_factory=dict)
    created: float = 0.0
    modified: float = 0.0

    @model_validator(mode="after")
    def _session_keys_exist(self) -> "Project":
        known = {it.id for it in self.breakdown.items} | {b.id for b in self.timeline.blocks}
        for key in self.sessions:
            if key not in known:
                raise ValueError(f"session key {key} references no breakdown item or block")
        return self


def new_project_id(script: str, now: float) -> str:
    """Deterministic for a fixed clock (replay mode), unique enough live."""
    digest = hashlib.sha256(f"{script}\n{now}".encode("utf-8")).hexdigest()[:16]
    return f"p{digest}"


def project_to_doc(p: Project) -> dict[str, Any]:
    return {
        "id": p.id,
        "script": p.script,
        "breakdown": breakdown_to_doc(p.breakdown),
        "timeline": timeline_to_doc(p.timeline),
        "sessions": {k: session_to_doc(v) for k, v in sorted(p.sessions.items())},
        "assets": {k: base64.b64encode(v).decode("ascii") for k, v in sorted(p.assets.items())},
        "created": round_time(p.created),
        "modified": round_time(p.modified),
    }


def project_from_doc(doc: Mapping[str, Any]) -> Project:
    return Project(
        id=doc["id"],
        script=doc.get("script", ""),
        breakdown=breakdown_from_doc(doc.get("breakdown", {})),
        timeline=timeline_from_doc(doc.get("timeline", {})),
        sessions={k: session_from_doc(v) for k, v in doc.get("sessions", {}).items()},
        assets={k: base64.b64decode(v) for k, v in doc.get("assets", {}).items()},
        created=doc.get("created", 0.0),
        modified=doc.get("modified", 0.0),
    )


Clock = Callable[[], float]


def system_clock() -> float:
    import time

    return time.time()


def fixed_clock() -> float:
    """Replay-mode clock: byte-identical documents across runs."""
    return 0.0
