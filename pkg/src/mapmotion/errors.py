"""Typed error hierarchy shared across the engine.

Every error carries a machine-readable ``code`` so the HTTP facade and the
CLI can map failures onto the wire-level error document without string
matching.
"""

from __future__ import annotations

from typing import Any


class EngineError(Exception):
    """Base class for all engine errors."""

    code = "internal"

    def __init__(self, message: str, detail: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.detail = detail or {}


class InvalidGeometryError(EngineError):
    code = "invalid_geometry"


class AntimeridianError(InvalidGeometryError):
    """Shape crosses the antimeridian, which the planar pipeline rejects."""

    code = "antimeridian"


class EmptyInputError(EngineError):
    code = "empty_input"


class NotFoundError(EngineError):
    code = "not_found"


class InvariantError(EngineError):
    """An operation would violate a documented model invariant."""

    code = "invariant"


class ConflictError(EngineError):
    """Optimistic-concurrency failure: the caller's revision is stale."""

    code = "conflict"


class TransportError(EngineError):
    """Network-level failure; retryable."""

    code = "transport"


class ParseError(EngineError):
    """A response body could not be parsed; raw payload attached."""

    code = "parse"

    def __init__(self, message: str, raw: str = "", detail: dict[str, Any] | None = None):
        super().__init__(message, detail)
        self.raw = raw


class UnsupportedGeometryError(ParseError):
    code = "unsupported_geometry"


class FixtureMissingError(EngineError):
    """Replay transport found no fixture for the request hash."""

    code = "fixture_missing"

    def __init__(self, request_hash: str, path: str):
        super().__init__(
            f"no recorded fixture for request hash {request_hash} (expected at {path})",
            {"request_hash": request_hash, "path": path},
        )
        self.request_hash = request_hash


class ProviderError(EngineError):
    """Upstream chat provider returned a non-success status."""

    code = "provider"

    def __init__(self, message: str, status: int, retry_after: float | None = None):
        super().__init__(message, {"status": status})
        self.status = status
        self.retry_after = retry_after
        self.retryable = status == 429 or status >= 500


class SchemaViolationError(EngineError):
    """Tool-call arguments failed schema validation; raw text attached."""

    code = "schema_violation"

    def __init__(self, message: str, raw: str = "", missing: list[str] | None = None):
        super().__init__(message, {"missing": missing or []})
        self.raw = raw
        self.missing = missing or []


class MissingToolCallError(EngineError):
    code = "missing_call"


class BreakdownFailedError(EngineError):
    """Scene breakdown could not produce a valid item list after repairs."""

    code = "agent_failed"

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class ActionFailedError(EngineError):
    """A geospatial action could not be executed."""

    code = "geocode_failed"

    def __init__(self, message: str, failing_query: str | None = None, hop_index: int | None = None):
        detail: dict[str, Any] = {}
        if failing_query is not None:
            detail["failing_query"] = failing_query
        if hop_index is not None:
            detail["hop_index"] = hop_index
        super().__init__(message, detail)
        self.failing_query = failing_query
        self.hop_index = hop_index


class CompileBlockedError(EngineError):
    """Compilation requires every breakdown item to be resolved."""

    code = "invalid_input"

    def __init__(self, item_id: str):
        super().__init__(f"breakdown item {item_id} is not resolved", {"item_id": item_id})
        self.item_id = item_id
