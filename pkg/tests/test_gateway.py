import json
import logging

import pytest

from mapmotion.errors import (
    FixtureMissingError,
    MissingToolCallError,
    ParseError,
    ProviderError,
    SchemaViolationError,
)
from mapmotion.gateway import (
    ChatMessage,
    ChatRequest,
    ChatResponse,
    Gateway,
    GatewayConfig,
    Role,
    ToolCall,
    ToolSchema,
    canonical_request,
    parse_provider_response,
    parse_tool_call,
    request_hash,
)


def make_request(content="hello", model="o1"):
    return ChatRequest(
        model_id=model,
        messages=(ChatMessage(role=Role.system, content="sys"), ChatMessage(role=Role.user, content=content)),
    )


def provider_body(text=None, tool_calls=None):
    message = {"role": "assistant", "content": text}
    if tool_calls:
        message["tool_calls"] = [
            {"id": f"call_{i}", "type": "function", "function": {"name": name, "arguments": json.dumps(args)}}
            for i, (name, args) in enumerate(tool_calls)
        ]
    return json.dumps(
        {"choices": [{"message": message}], "usage": {"prompt_tokens": 10, "completion_tokens": 5}}
    )


class FakeTransport:
    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def post(self, url, headers, payload, timeout):
        self.calls.append((url, dict(headers), json.loads(json.dumps(payload))))
        item = self.responses.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


# ---------------------------------------------------------------- hashing


def test_request_hash_stable_across_construction():
    assert request_hash(make_request()) == request_hash(make_request())


def test_request_hash_sensitive_to_one_byte():
    assert request_hash(make_request("hello")) != request_hash(make_request("hello!"))


def test_request_validation():
    with pytest.raises(Exception):
        ChatRequest(model_id="o1", messages=())
    with pytest.raises(Exception):
        ChatRequest(model_id="o1", messages=(ChatMessage(role=Role.assistant, content="x"),))


# ---------------------------------------------------------------- replay


def test_replay_returns_identical_response(tmp_path):
    config = GatewayConfig(mode="record", fixtures_dir=tmp_path)
    body = provider_body(text="recorded")
    gw = Gateway(config, transport=FakeTransport([(200, {}, body)]))
    req = make_request()
    gw.complete(req, agent="breakdown")

    replay = Gateway(GatewayConfig(mode="replay", fixtures_dir=tmp_path))
    first = replay.complete(req, agent="breakdown")
    second = replay.complete(req, agent="breakdown")
    assert first == second
    assert first.text == "recorded"
    assert first.latency_ms == 0.0


def test_replay_miss_names_hash(tmp_path):
    gw = Gateway(GatewayConfig(mode="replay", fixtures_dir=tmp_path))
    req = make_request()
    with pytest.raises(FixtureMissingError) as err:
        gw.complete(req, agent="breakdown")
    assert request_hash(req) in str(err.value)


def test_fixture_contains_canonical_request(tmp_path):
    config = GatewayConfig(mode="record", fixtures_dir=tmp_path)
    gw = Gateway(config, transport=FakeTransport([(200, {}, provider_body(text="ok"))]))
    req = make_request()
    gw.complete(req, agent="researcher")
    path = gw.fixture_path(req, "researcher")
    assert path.exists()
    head = path.read_text().split("\n---\n")[0]
    assert json.loads(head) == json.loads(json.dumps(canonical_request(req)))


# ---------------------------------------------------------------- live + retry


def test_retry_on_5xx_then_success():
    sleeps = []
    transport = FakeTransport([(500, {}, "boom"), (200, {}, provider_body(text="ok"))])
    gw = Gateway(GatewayConfig(mode="live"), transport=transport, sleep=sleeps.append)
    out = gw.complete(make_request())
    assert out.text == "ok"
    assert sleeps == [1.0]


def test_retry_honors_retry_after():
    sleeps = []
    transport = FakeTransport([(429, {"Retry-After": "7"}, "slow down"), (200, {}, provider_body(text="ok"))])
    gw = Gateway(GatewayConfig(mode="live"), transport=transport, sleep=sleeps.append)
    gw.complete(make_request())
    assert sleeps == [7.0]


def test_no_retry_on_4xx():
    transport = FakeTransport([(400, {}, "bad request")])
    gw = Gateway(GatewayConfig(mode="live"), transport=transport, sleep=lambda s: None)
    with pytest.raises(ProviderError):
        gw.complete(make_request())
    assert len(transport.calls) == 1


def test_gives_up_after_three_attempts():
    transport = FakeTransport([(500, {}, "a"), (503, {}, "b"), (502, {}, "c")])
    gw = Gateway(GatewayConfig(mode="live"), transport=transport, sleep=lambda s: None)
    with pytest.raises(ProviderError):
        gw.complete(make_request())
    assert len(transport.calls) == 3


def test_tools_serialized_on_wire():
    schema = ToolSchema(name="f", description="d", parameters={"type": "object", "properties": {}})
    req = ChatRequest(model_id="o1", messages=(ChatMessage(role=Role.user, content="x"),), tools=(schema,))
    transport = FakeTransport([(200, {}, provider_body(tool_calls=[("f", {})]))])
    gw = Gateway(GatewayConfig(mode="live"), transport=transport)
    gw.complete(req)
    payload = transport.calls[0][2]
    assert payload["tools"][0]["function"]["name"] == "f"
    assert payload["temperature"] == 0.0


# ---------------------------------------------------------------- parsing


def test_parse_malformed_body():
    with pytest.raises(ParseError) as err:
        parse_provider_response("not json {")
    assert err.value.raw.startswith("not json")


def test_parse_response_needs_text_or_calls():
    with pytest.raises(ParseError):
        parse_provider_response(provider_body(text=None))


def test_parse_tool_call_coerces_string_numbers():
    schema = ToolSchema(
        name="locate",
        parameters={
            "type": "object",
            "properties": {"lat": {"type": "number"}, "lon": {"type": "number"}},
            "required": ["lat", "lon"],
        },
    )
    resp = ChatResponse(tool_calls=(ToolCall(name="locate", arguments={"lat": "51.5074", "lon": "-0.1278"}),))
    args = parse_tool_call(resp, schema)
    assert args == {"lat": 51.5074, "lon": -0.1278}
    assert isinstance(args["lat"], float)


def test_parse_tool_call_defaults_and_required():
    schema = ToolSchema(
        name="f",
        parameters={
            "type": "object",
            "properties": {"a": {"type": "string"}, "b": {"type": "integer", "default": 3}},
            "required": ["a"],
        },
    )
    resp = ChatResponse(tool_calls=(ToolCall(name="f", arguments={"a": "x"}),))
    assert parse_tool_call(resp, schema) == {"a": "x", "b": 3}

    missing = ChatResponse(tool_calls=(ToolCall(name="f", arguments={"b": 1}),))
    with pytest.raises(SchemaViolationError) as err:
        parse_tool_call(missing, schema)
    assert "a" in err.value.missing


def test_parse_tool_call_text_only_is_missing_call():
    resp = ChatResponse(text="just words")
    with pytest.raises(MissingToolCallError):
        parse_tool_call(resp, ToolSchema(name="f"))


def test_parse_tool_call_drops_unknown_fields(caplog):
    schema = ToolSchema(name="f", parameters={"type": "object", "properties": {"a": {"type": "string"}}})
    resp = ChatResponse(tool_calls=(ToolCall(name="f", arguments={"a": "x", "mystery": 1}),))
    with caplog.at_level(logging.WARNING):
        args = parse_tool_call(resp, schema)
    assert args == {"a": "x"}
    assert any("mystery" in r.message for r in caplog.records)


def test_parse_tool_call_nested_arrays():
    schema = ToolSchema(
        name="route",
        parameters={
            "type": "object",
            "properties": {
                "waypoints": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"}},
                }
            },
            "required": ["waypoints"],
        },
    )
    resp = ChatResponse(
        tool_calls=(ToolCall(name="route", arguments={"waypoints": [["51.5", "-0.1"], [43.6, -79.4]]}),)
    )
    args = parse_tool_call(resp, schema)
    assert args["waypoints"] == [[51.5, -0.1], [43.6, -79.4]]


def test_parse_tool_call_enum_enforced():
    schema = ToolSchema(
        name="f",
        parameters={"type": "object", "properties": {"mode": {"type": "string", "enum": ["sea", "air"]}}},
    )
    resp = ChatResponse(tool_calls=(ToolCall(name="f", arguments={"mode": "land"}),))
    with pytest.raises(SchemaViolationError):
        parse_tool_call(resp, schema)
