"""Provider-neutral chat-completion client.

Speaks the common chat-completions wire protocol (messages + function
tools) over HTTP and supports three transports: ``live`` (network),
``record`` (network + fixture write) and ``replay`` (fixture read, zero
network). Fixtures are keyed by a canonical request hash that is stable
across field ordering and whitespace, one file per request under
``fixtures/<agent>/<hash>.txt`` containing the canonical request and the
raw response, so prompt drift changes the key and fails replay loudly.

No other module performs LLM network activity: agents only talk through
this gateway.
"""

from __future__ import annotations

import enum
import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Protocol

import httpx
from pydantic import Field, model_validator

from .canonical import canonical_json, content_hash
from .errors import (
    FixtureMissingError,
    MissingToolCallError,
    ParseError,
    ProviderError,
    SchemaViolationError,
    TransportError,
)
from .model import Frozen

log = logging.getLogger(__name__)

RETRY_BACKOFF_S = (1.0, 2.0, 4.0)
MAX_ATTEMPTS = 3
DEFAULT_MODEL_ROUTING = {"breakdown": "o1", "researcher": "sonar-pro"}


class Role(str, enum.Enum):
    system = "system"
    user = "user"
    assistant = "assistant"
    tool = "tool"


class ChatMessage(Frozen):
    role: Role
    content: str


class ToolSchema(Frozen):
    name: str = Field(min_length=1)
    description: str = ""
    parameters: dict[str, Any] = Field(default_factory=lambda: {"type": "object", "properties": {}})


class ChatRequest(Frozen):
    model_id: str
    messages: tuple[ChatMessage, ...] = Field(min_length=1)
    tools: tuple[ToolSchema, ...] = ()
    temperature: float = 0.0
    max_tokens: int = 4096

    @model_validator(mode="after")
    def _first_role(self) -> "ChatRequest":
        if self.messages[0].role not in (Role.system, Role.user):
            raise ValueError("first message must be a system or user message")
        names = [t.name for t in self.tools]
        if len(set(names)) != len(names):
            raise ValueError("tool names must be unique within a request")
        return self


class ToolCall(Frozen):
    name: str
    arguments: dict[str, Any]


class Usage(Frozen):
    prompt_tokens: int = 0
    completion_tokens: int = 0


class ChatResponse(Frozen):
    text: Optional[str] = None
    tool_calls: tuple[ToolCall, ...] = ()
    usage: Usage = Usage()
    latency_ms: float = 0.0

    @model_validator(mode="after")
    def _not_empty(self) -> "ChatResponse":
        if self.text is None and not self.tool_calls:
            raise ValueError("response carries neither text nor tool calls")
        return self


# ---------------------------------------------------------------------------
# Canonical form and hashing
# ---------------------------------------------------------------------------


def canonical_request(req: ChatRequest) -> dict[str, Any]:
    return {
        "model_id": req.model_id,
        "messages": [{"role": m.role.value, "content": m.content} for m in req.messages],
        "tools": [
            {"name": t.name, "description": t.description, "parameters": t.parameters} for t in req.tools
        ],
        "temperature": req.temperature,
        "max_tokens": req.max_tokens,
    }


def request_hash(req: ChatRequest) -> str:
    return content_hash(canonical_request(req))


# ---------------------------------------------------------------------------
# Transport
# ---------------------------------------------------------------------------


class ChatTransport(Protocol):
    def post(
        self, url: str, headers: Mapping[str, str], payload: Mapping[str, Any], timeout: float
    ) -> tuple[int, Mapping[str, str], str]:
        """Returns (status, response headers, body text)."""
        ...  # pragma: no cover


class HttpxChatTransport:
    def post(self, url, headers, payload, timeout):
        try:
            resp = httpx.post(url, headers=dict(headers), json=dict(payload), timeout=timeout)
        except httpx.HTTPError as exc:
            raise TransportError(f"chat transport failure: {exc}") from exc
        return resp.status_code, dict(resp.headers), resp.text


@dataclass(frozen=True)
class GatewayConfig:
    mode: str = "replay"
    fixtures_dir: Path = Path("fixtures")
    base_url: str = "https://api.openai.com/v1"
    api_key: str = ""
    research_base_url: Optional[str] = None
    research_api_key: Optional[str] = None
    model_routing: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_MODEL_ROUTING))
    timeout_s: float = 120.0

    @classmethod
    def from_env(cls, mode: str | None = None, fixtures_dir: str | None = None) -> "GatewayConfig":
        return cls(
            mode=mode or os.environ.get("LLM_MODE", "replay"),
            fixtures_dir=Path(fixtures_dir or os.environ.get("LLM_FIXTURES_DIR", "fixtures")),
            base_url=os.environ.get("LLM_BASE_URL", "https://api.openai.com/v1"),
            api_key=os.environ.get("LLM_API_KEY", ""),
            research_base_url=os.environ.get("RESEARCH_LLM_BASE_URL"),
            research_api_key=os.environ.get("RESEARCH_LLM_API_KEY"),
        )

    def model_for(self, role: str) -> str:
        return self.model_routing.get(role, DEFAULT_MODEL_ROUTING.get(role, "o1"))


FIXTURE_SEPARATOR = "\n---\n"


class Gateway:
    """Shareable across threads; replay mode is lock-free and read-only."""

    def __init__(
        self,
        config: GatewayConfig,
        transport: ChatTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if config.mode not in ("live", "record", "replay"):
            raise ValueError(f"unknown gateway mode {config.mode!r}")
        self.config = config
        self.transport = transport or HttpxChatTransport()
        self._sleep = sleep

    # -- fixtures -------------------------------------------------------

    def fixture_path(self, req: ChatRequest, agent: str) -> Path:
        return Path(self.config.fixtures_dir) / agent / f"{request_hash(req)}.txt"

    def _read_fixture(self, req: ChatRequest, agent: str) -> str:
        path = self.fixture_path(req, agent)
        if not path.exists():
            raise FixtureMissingError(request_hash(req), str(path))
        text = path.read_text(encoding="utf-8")
        if FIXTURE_SEPARATOR not in text:
            raise ParseError(f"fixture {path} is malformed (missing separator)", raw=text)
        return text.split(FIXTURE_SEPARATOR, 1)[1]

    def _write_fixture(self, req: ChatRequest, agent: str, raw: str) -> None:
        path = self.fixture_path(req, agent)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(canonical_json(canonical_request(req)) + FIXTURE_SEPARATOR + raw, encoding="utf-8")

    # -- completion -----------------------------------------------------

    def complete(self, req: ChatRequest, agent: str = "default") -> ChatResponse:
        if self.config.mode == "replay":
            raw = self._read_fixture(req, agent)
            return parse_provider_response(raw, latency_ms=0.0)

        raw, latency_ms = self._post_with_retry(req, agent)
        response = parse_provider_response(raw, latency_ms=latency_ms)
        if self.config.mode == "record":
            self._write_fixture(req, agent, raw)
        return response

    def _endpoint(self, agent: str) -> tuple[str, str]:
        if agent == "researcher" and self.config.research_base_url:
            return self.config.research_base_url, self.config.research_api_key or self.config.api_key
        return self.config.base_url, self.config.api_key

    def _post_with_retry(self, req: ChatRequest, agent: str) -> tuple[str, float]:
        base_url, api_key = self._endpoint(agent)
        url = base_url.rstrip("/") + "/chat/completions"
        headers = {"Authorization": f"Bearer {api_key}", "Content-Type": "application/json"}
        payload: dict[str, Any] = {
            "model": req.model_id,
            "messages": [{"role": m.role.value, "content": m.content} for m in req.messages],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        if req.tools:
            payload["tools"] = [
                {
                    "type": "function",
                    "function": {"name": t.name, "description": t.description, "parameters": t.parameters},
                }
                for t in req.tools
            ]

        last_error: Exception | None = None
        for attempt in range(MAX_ATTEMPTS):
            try:
                started = time.monotonic()
                status, resp_headers, body = self.transport.post(url, headers, payload, self.config.timeout_s)
                latency_ms = (time.monotonic() - started) * 1000.0
                if 200 <= status < 300:
                    return body, latency_ms
                retry_after = _parse_retry_after(resp_headers)
                err = ProviderError(f"provider returned status {status}", status, retry_after)
                if not err.retryable:
                    raise err
                last_error = err
            except TransportError as exc:
                last_error = exc
                retry_after = None
            if attempt < MAX_ATTEMPTS - 1:
                delay = retry_after if retry_after is not None else RETRY_BACKOFF_S[attempt]
                self._sleep(delay)
        assert last_error is not None
        raise last_error


def _parse_retry_after(headers: Mapping[str, str]) -> float | None:
    value = {k.lower(): v for k, v in headers.items()}.get("retry-after")
    if value is None:
        return None
    try:
        return float(value)
    except ValueError:
        return None


# ---------------------------------------------------------------------------
# Response parsing
# ---------------------------------------------------------------------------


def parse_provider_response(raw: str, latency_ms: float = 0.0) -> ChatResponse:
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"provider response is not valid JSON: {exc}", raw=raw) from exc
    try:
        message = data["choices"][0]["message"]
    except (KeyError, IndexError, TypeError) as exc:
        raise ParseError("provider response missing choices[0].message", raw=raw) from exc

    calls = []
    for tc in message.get("tool_calls") or []:
        fn = tc.get("function", {})
        args_text = fn.get("arguments", "{}")
        try:
            arguments = json.loads(args_text) if isinstance(args_text, str) else dict(args_text)
        except json.JSONDecodeError as exc:
            raise SchemaViolationError(
                f"tool call {fn.get('name')!r} has unparseable arguments", raw=str(args_text)
            ) from exc
        calls.append(ToolCall(name=fn.get("name", ""), arguments=arguments))

    usage_doc = data.get("usage") or {}
    usage = Usage(
        prompt_tokens=int(usage_doc.get("prompt_tokens", 0)),
        completion_tokens=int(usage_doc.get("completion_tokens", 0)),
    )
    text = message.get("content")
    try:
        return ChatResponse(text=text, tool_calls=tuple(calls), usage=usage, latency_ms=latency_ms)
    except Exception as exc:
        raise ParseError(f"provider response invalid: {exc}", raw=raw) from exc


# ---------------------------------------------------------------------------
# Tool-call argument validation
# ---------------------------------------------------------------------------


def _coerce(value: Any, schema: Mapping[str, Any], path: str, raw: str) -> Any:
    kind = schema.get("type")
    if "enum" in schema and value not in schema["enum"]:
        raise SchemaViolationError(f"{path}: {value!r} is not one of {schema['enum']}", raw=raw)
    if kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise SchemaViolationError(f"{path}: expected number, got {type(value).__name__}", raw=raw)
        try:
            return float(value)
        except ValueError as exc:
            raise SchemaViolationError(f"{path}: {value!r} is not a number", raw=raw) from exc
    if kind == "integer":
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise SchemaViolationError(f"{path}: expected integer, got {type(value).__name__}", raw=raw)
        try:
            f = float(value)
        except ValueError as exc:
            raise SchemaViolationError(f"{path}: {value!r} is not an integer", raw=raw) from exc
        if f != int(f):
            raise SchemaViolationError(f"{path}: {value!r} is not an integer", raw=raw)
        return int(f)
    if kind == "boolean":
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "false"):
            return value.lower() == "true"
        raise SchemaViolationError(f"{path}: expected boolean, got {value!r}", raw=raw)
    if kind == "string":
        if isinstance(value, str):
            return value
        if isinstance(value, (int, float)):
            return str(value)
        raise SchemaViolationError(f"{path}: expected string, got {type(value).__name__}", raw=raw)
    if kind == "array":
        if not isinstance(value, list):
            raise SchemaViolationError(f"{path}: expected array, got {type(value).__name__}", raw=raw)
        items = schema.get("items")
        if items is None:
            return list(value)
        return [_coerce(v, items, f"{path}[{i}]", raw) for i, v in enumerate(value)]
    if kind == "object":
        if not isinstance(value, Mapping):
            raise SchemaViolationError(f"{path}: expected object, got {type(value).__name__}", raw=raw)
        props = schema.get("properties")
        if props is None:
            return dict(value)
        return _coerce_object(value, schema, path, raw)
    return value


def _coerce_object(value: Mapping[str, Any], schema: Mapping[str, Any], path: str, raw: str) -> dict[str, Any]:
    props: Mapping[str, Any] = schema.get("properties", {})
    required = schema.get("required", [])
    out: dict[str, Any] = {}
    for key, sub in props.items():
        if key in value:
            out[key] = _coerce(value[key], sub, f"{path}.{key}" if path else key, raw)
        elif "default" in sub:
            out[key] = sub["default"]
    missing = [k for k in required if k not in out]
    if missing:
        raise SchemaViolationError(f"required field(s) missing: {', '.join(missing)}", raw=raw, missing=missing)
    unknown = [k for k in value.keys() if k not in props]
    if unknown:
        log.warning("tool call %s: dropping unknown argument field(s) %s", path or "<root>", unknown)
    return out


def parse_tool_call(resp: ChatResponse, expected: ToolSchema) -> dict[str, Any]:
    """First tool call matching the expected name, with arguments coerced
    to the schema types (numbers in string form are converted, missing
    optional fields take their declared defaults, unknown fields are
    dropped with a warning)."""
    match = next((tc for tc in resp.tool_calls if tc.name == expected.name), None)
    if match is None:
        raise MissingToolCallError(f"response carries no {expected.name!r} tool call")
    raw = json.dumps(match.arguments)
    return _coerce_object(match.arguments, expected.parameters, "", raw)
