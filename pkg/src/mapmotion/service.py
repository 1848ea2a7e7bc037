"""HTTP facade over the engine.

All success bodies are canonical JSON (deterministic bytes across
restarts); every non-2xx body is an error document {code, message,
detail} with code drawn from: not_found, invalid_input, agent_failed,
geocode_failed, conflict, internal. Mutating endpoints carry the caller's
last-seen revision and conflict (409) when the store has moved on.
"""

from __future__ import annotations

import logging
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import PlainTextResponse, Response
from pydantic import BaseModel

from .app import Engine, EngineConfig, breakdown_options_from_doc, item_edits_from_docs
from .canonical import canonical_bytes
from .errors import ConflictError, EngineError
from .model import breakdown_to_doc, edit_from_doc, timeline_to_doc
from .project import project_to_doc
from .sequencer import evaluate, frame_lines, frame_to_doc

log = logging.getLogger(__name__)

_API_CODE = {
    "not_found": ("not_found", 404),
    "conflict": ("conflict", 409),
    "invariant": ("invalid_input", 400),
    "invalid_input": ("invalid_input", 400),
    "empty_input": ("invalid_input", 400),
    "invalid_geometry": ("invalid_input", 400),
    "antimeridian": ("invalid_input", 400),
    "parse": ("invalid_input", 400),
    "unsupported_geometry": ("invalid_input", 400),
    "agent_failed": ("agent_failed", 502),
    "missing_call": ("agent_failed", 502),
    "schema_violation": ("agent_failed", 502),
    "fixture_missing": ("agent_failed", 502),
    "provider": ("agent_failed", 502),
    "geocode_failed": ("geocode_failed", 502),
    "transport": ("geocode_failed", 502),
}


def api_error_body(code: str, message: str, detail: dict[str, Any] | None = None) -> bytes:
    return canonical_bytes({"code": code, "message": message, "detail": detail or {}})


def _canonical_response(doc: Any, status_code: int = 200) -> Response:
    return Response(content=canonical_bytes(doc), media_type="application/json", status_code=status_code)


class CreateProjectBody(BaseModel):
    script: str


class BreakdownBody(BaseModel):
    options: Optional[dict[str, Any]] = None
    revision: int


class RegenerateBody(BaseModel):
    edits: list[dict[str, Any]] = []
    revision: int


class ResearchBody(BaseModel):
    revision: int


class ChatBody(BaseModel):
    message: str
    revision: int


class CompileBody(BaseModel):
    options: Optional[dict[str, Any]] = None
    revision: int


class TimelineEditBody(BaseModel):
    edit: dict[str, Any]
    revision: int


def create_app(engine: Engine | None = None) -> FastAPI:
    app = FastAPI(title="mapmotion", docs_url=None, redoc_url=None)
    app.state.engine = engine or Engine.from_config(EngineConfig.from_env())

    def eng() -> Engine:
        return app.state.engine

    @app.exception_handler(EngineError)
    async def engine_error_handler(request: Request, exc: EngineError):
        api_code, status = _API_CODE.get(exc.code, ("internal", 500))
        if status >= 500:
            log.warning("request failed: %s (%s)", exc.message, exc.code)
        return Response(
            content=api_error_body(api_code, exc.message, exc.detail),
            media_type="application/json",
            status_code=status,
        )

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(request: Request, exc: RequestValidationError):
        return Response(
            content=api_error_body("invalid_input", "request body failed validation", {"errors": str(exc)}),
            media_type="application/json",
            status_code=400,
        )

    @app.exception_handler(Exception)
    async def internal_error_handler(request: Request, exc: Exception):
        log.exception("internal error")
        return Response(
            content=api_error_body("internal", str(exc)), media_type="application/json", status_code=500
        )

    # -- health ---------------------------------------------------------

    @app.get("/healthz")
    def healthz():
        return _canonical_response({"status": "ok"})

    # -- projects ---------------------------------------------------------

    @app.post("/projects", status_code=201)
    def create_project(body: CreateProjectBody):
        project = eng().create_project(body.script)
        revision = eng().store.create(project)
        return _canonical_response({"revision": revision, "project": project_to_doc(project)}, 201)

    @app.get("/projects/{project_id}")
    def get_project(project_id: str):
        project, revision = eng().store.load(project_id)
        return _canonical_response({"revision": revision, "project": project_to_doc(project)})

    @app.delete("/projects/{project_id}", status_code=204)
    def delete_project(project_id: str, revision: Optional[int] = None):
        if revision is not None:
            _, current = eng().store.load(project_id)
            if current != revision:
                raise ConflictError(f"project {project_id} is at revision {current}, caller expected {revision}")
        eng().store.delete(project_id)
        return Response(status_code=204)

    # -- agent pipeline ---------------------------------------------------

    def _mutate(project_id: str, revision: int, fn):
        project, current = eng().store.load(project_id)
        if current != revision:
            raise ConflictError(
                f"project {project_id} is at revision {current}, caller expected {revision}",
                {"current_revision": current, "expected_revision": revision},
            )
        result = fn(project)
        new_project = result[-1] if isinstance(result, tuple) else result
        new_revision = eng().store.save(new_project, expected_revision=revision)
        return result, new_revision

    @app.post("/projects/{project_id}/breakdown")
    def run_breakdown(project_id: str, body: BreakdownBody):
        opts = breakdown_options_from_doc(body.options)
        result, revision = _mutate(project_id, body.revision, lambda p: eng().run_breakdown(p, opts))
        return _canonical_response({"revision": revision, "breakdown": breakdown_to_doc(result.breakdown)})

    @app.post("/projects/{project_id}/breakdown/regenerate")
    def regenerate_breakdown(project_id: str, body: RegenerateBody):
        edits = item_edits_from_docs(body.edits)
        result, revision = _mutate(project_id, body.revision, lambda p: eng().regenerate_breakdown(p, edits))
        return _canonical_response({"revision": revision, "breakdown": breakdown_to_doc(result.breakdown)})

    @app.post("/projects/{project_id}/research")
    def research(project_id: str, body: ResearchBody):
        result, revision = _mutate(project_id, body.revision, lambda p: eng().research_all(p))
        return _canonical_response({"revision": revision, "project": project_to_doc(result)})

    @app.post("/projects/{project_id}/blocks/{block_id}/chat")
    def chat(project_id: str, block_id: str, body: ChatBody):
        (reply, updated, _project), revision = _mutate(
            project_id, body.revision, lambda p: eng().chat(p, block_id, body.message)
        )
        return _canonical_response({"revision": revision, "reply": reply, "updated": updated})

    @app.post("/projects/{project_id}/compile")
    def compile_project(project_id: str, body: CompileBody):
        opts = breakdown_options_from_doc(body.options)
        result, revision = _mutate(project_id, body.revision, lambda p: eng().compile_project(p, opts))
        return _canonical_response({"revision": revision, "timeline": timeline_to_doc(result.timeline)})

    @app.put("/projects/{project_id}/timeline")
    def edit_timeline(project_id: str, body: TimelineEditBody):
        def apply(project):
            edit = edit_from_doc(body.edit, project.timeline)
            return eng().edit_timeline(project, edit)

        result, revision = _mutate(project_id, body.revision, apply)
        return _canonical_response({"revision": revision, "timeline": timeline_to_doc(result.timeline)})

    # -- evaluation ---------------------------------------------------------

    @app.get("/projects/{project_id}/frame")
    def frame(project_id: str, t: float):
        project, _ = eng().store.load(project_id)
        return _canonical_response(frame_to_doc(evaluate(project.timeline, t)))

    @app.get("/projects/{project_id}/frames")
    def frames(project_id: str, fps: int):
        project, _ = eng().store.load(project_id)
        lines = "\n".join(frame_lines(project.timeline, fps)) + "\n"
        return PlainTextResponse(lines)

    @app.get("/projects/{project_id}/export")
    def export(project_id: str):
        project, _ = eng().store.load(project_id)
        return Response(content=canonical_bytes(project_to_doc(project)), media_type="application/json")

    # -- assets -------------------------------------------------------------

    @app.post("/assets", status_code=201)
    async def upload_asset(request: Request):
        data = await request.body()
        if not data:
            return Response(
                content=api_error_body("invalid_input", "asset body is empty"),
                media_type="application/json",
                status_code=400,
            )
        asset_id = eng().store.put_asset(data)
        return _canonical_response({"asset_id": asset_id}, 201)

    @app.get("/assets/{asset_id}")
    def get_asset(asset_id: str):
        data = eng().store.get_asset(asset_id)
        return Response(content=data, media_type="application/octet-stream")

    return app
