import json

import pytest
from fastapi.testclient import TestClient

from mapmotion.app import Engine
from mapmotion.canonical import canonical_json
from mapmotion.gateway import GatewayConfig
from mapmotion.model import block_to_doc, timeline_to_doc
from mapmotion.project import Project, fixed_clock, project_to_doc
from mapmotion.sequencer import evaluate, frame_to_doc
from mapmotion.service import create_app
from mapmotion.store import ProjectStore

from conftest import camera_block, highlight_block
from test_breakdown import ScriptedGateway
from test_researcher import FakeGeocoder


@pytest.fixture
def engine(tmp_path):
    return Engine(
        store=ProjectStore(tmp_path),
        gateway=ScriptedGateway([]),
        geocoder=FakeGeocoder({}),
        clock=fixed_clock,
    )


@pytest.fixture
def client(engine):
    return TestClient(create_app(engine), raise_server_exceptions=False)


def seeded_project(engine, pid="ptest"):
    from mapmotion.model import Timeline

    project = Project(
        id=pid,
        script="s",
        timeline=Timeline(blocks=(camera_block("c", 0, 3, lat=40, lon=-70, zoom=8), highlight_block("h", 0.5, 3))),
    )
    revision = engine.store.create(project)
    return project, revision


def test_create_project_returns_201_and_revision_1(client):
    resp = client.post("/projects", json={"script": "zoom to Toronto"})
    assert resp.status_code == 201
    body = resp.json()
    assert body["revision"] == 1
    assert body["project"]["script"] == "zoom to Toronto"
    assert body["project"]["id"]


def test_get_project_roundtrip(client, engine):
    project, revision = seeded_project(engine)
    resp = client.get("/projects/ptest")
    assert resp.status_code == 200
    assert resp.json()["revision"] == revision
    assert resp.json()["project"] == json.loads(canonical_json(project_to_doc(project)))


def test_get_missing_project_is_api_error(client):
    resp = client.get("/projects/ghost")
    assert resp.status_code == 404
    body = resp.json()
    assert body["code"] == "not_found"
    assert "message" in body and "detail" in body


def test_timeline_edit_bumps_revision(client, engine):
    seeded_project(engine)
    edit = {"op": "retime", "block_id": "h", "start_time": 0.5, "end_time": 4.0}
    resp = client.put("/projects/ptest/timeline", json={"edit": edit, "revision": 1})
    assert resp.status_code == 200
    body = resp.json()
    assert body["revision"] == 2
    assert body["timeline"]["duration"] == 4.0


def test_stale_revision_conflicts_and_store_unchanged(client, engine):
    project, _ = seeded_project(engine)
    edit = {"op": "retime", "block_id": "h", "start_time": 0.5, "end_time": 4.0}
    assert client.put("/projects/ptest/timeline", json={"edit": edit, "revision": 1}).status_code == 200
    resp = client.put("/projects/ptest/timeline", json={"edit": edit, "revision": 1})
    assert resp.status_code == 409
    assert resp.json()["code"] == "conflict"
    loaded, revision = engine.store.load("ptest")
    assert revision == 2  # only the first edit landed


def test_edit_unknown_block_maps_to_not_found(client, engine):
    seeded_project(engine)
    edit = {"op": "delete", "block_id": "missing"}
    resp = client.put("/projects/ptest/timeline", json={"edit": edit, "revision": 1})
    assert resp.status_code == 404


def test_frame_endpoint_byte_equals_direct_evaluation(client, engine):
    project, _ = seeded_project(engine)
    resp = client.get("/projects/ptest/frame", params={"t": 3.0})
    assert resp.status_code == 200
    expected = canonical_json(frame_to_doc(evaluate(project.timeline, 3.0)))
    assert resp.content == expected.encode("utf-8")


def test_frames_stream_line_count(client, engine):
    seeded_project(engine)  # duration 3
    resp = client.get("/projects/ptest/frames", params={"fps": 10})
    lines = [line for line in resp.text.splitlines() if line]
    assert len(lines) == 31
    first = json.loads(lines[0])
    assert first["t"] == 0.0


def test_export_returns_canonical_project_document(client, engine):
    project, _ = seeded_project(engine)
    resp = client.get("/projects/ptest/export")
    assert resp.content == canonical_json(project_to_doc(project)).encode("utf-8")


def test_delete_project(client, engine):
    seeded_project(engine)
    assert client.delete("/projects/ptest").status_code == 204
    assert client.get("/projects/ptest").status_code == 404


def test_delete_with_stale_revision_conflicts(client, engine):
    seeded_project(engine)
    resp = client.delete("/projects/ptest", params={"revision": 9})
    assert resp.status_code == 409


def test_asset_upload_roundtrip(client):
    resp = client.post("/assets", content=b"sprite-bytes")
    assert resp.status_code == 201
    asset_id = resp.json()["asset_id"]
    got = client.get(f"/assets/{asset_id}")
    assert got.content == b"sprite-bytes"


def test_asset_missing_404(client):
    assert client.get("/assets/0123456789abcdef").status_code == 404


def test_healthz(client):
    resp = client.get("/healthz")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_invalid_body_is_invalid_input(client):
    resp = client.post("/projects", json={"noscript": True})
    assert resp.status_code == 400
    assert resp.json()["code"] == "invalid_input"


def test_breakdown_endpoint_requires_revision(client, engine):
    seeded_project(engine)
    resp = client.post("/projects/ptest/breakdown", json={"options": None})
    assert resp.status_code == 400  # revision is a required field


def test_research_checks_script_hash(client, engine):
    # seeded project has no breakdown; research must reject cleanly
    seeded_project(engine)
    resp = client.post("/projects/ptest/research", json={"revision": 1})
    assert resp.status_code == 400
    assert resp.json()["code"] == "invalid_input"


def test_responses_deterministic_across_restarts(engine, tmp_path):
    # a second app over the same store returns byte-identical responses
    seeded_project(engine)
    first_app = TestClient(create_app(engine), raise_server_exceptions=False)
    second_engine = Engine(
        store=ProjectStore(engine.store.root),
        gateway=ScriptedGateway([]),
        geocoder=FakeGeocoder({}),
        clock=fixed_clock,
    )
    second_app = TestClient(create_app(second_engine), raise_server_exceptions=False)
    for path, params in (
        ("/projects/ptest/frame", {"t": 1.5}),
        ("/projects/ptest/export", {}),
        ("/projects/ptest", {}),
    ):
        assert first_app.get(path, params=params).content == second_app.get(path, params=params).content


def test_insert_edit_through_service(client, engine):
    seeded_project(engine)
    block_doc = block_to_doc(highlight_block("h2", 3, 5, lat0=4))
    resp = client.put(
        "/projects/ptest/timeline", json={"edit": {"op": "insert", "block": block_doc}, "revision": 1}
    )
    assert resp.status_code == 200
    assert any(b["id"] == "h2" for b in resp.json()["timeline"]["blocks"])
