import json

import pytest
from fastapi.testclient import TestClient

from ocellens.ocel_json import running_example, write_ocel_json
from ocellens.service import ServiceConfig, create_app

RUNNING = write_ocel_json(running_example())
EMPTY = b'{"objectTypes": [], "eventTypes": [], "objects": [], "events": []}'

DRILL = {"kind": "drill-down", "object_type": "Test", "attribute": "type"}
UNFOLDS = [
    {"kind": "unfold", "object_type": f"Test~type={v}", "event_type": et}
    for v in ("ECG", "Blood")
    for et in ("ot", "rt")
]


@pytest.fixture
def client(tmp_path):
    app = create_app(ServiceConfig())
    with TestClient(app) as c:
        yield c


def _create(client, body=RUNNING):
    response = client.post("/api/sessions", content=body)
    assert response.status_code == 200, response.text
    return response.json()


def test_create_session_returns_summary(client):
    doc = _create(client)
    assert doc["version"] == 0
    summary = doc["summary"]
    assert summary["events"] == 5
    assert summary["objects"] == 3
    assert summary["object_types"] == ["Patient", "Test"]
    catalog = summary["catalog"]
    trees = {entry["base"]: entry["tree"] for entry in catalog["object_types"]}
    assert trees["Test"]["count"] == 2
    assert trees["Test"]["drillable"] == ["result", "type"]


def test_create_empty_session(client):
    doc = _create(client, EMPTY)
    assert doc["summary"]["events"] == 0
    assert doc["summary"]["objects"] == 0


def test_create_rejects_malformed_json(client):
    response = client.post("/api/sessions", content=b"{nope")
    assert response.status_code == 400
    assert response.json()["error"] == "JsonSyntaxError"


def test_create_reports_validation_details(client):
    doc = json.loads(EMPTY)
    doc["eventTypes"] = [{"name": "a", "attributes": []}]
    doc["events"] = [
        {
            "id": "e1",
            "type": "a",
            "time": "2024-01-01T00:00:00Z",
            "relationships": [{"objectId": "o9", "qualifier": "q"}],
        }
    ]
    response = client.post("/api/sessions", content=json.dumps(doc).encode())
    assert response.status_code == 400
    body = response.json()
    assert body["error"] == "ValidationError"
    assert any(v["rule"] == "dangling-object-ref" for v in body["violations"])


def test_upload_size_limit():
    app = create_app(ServiceConfig(max_upload_bytes=10))
    with TestClient(app) as client:
        response = client.post("/api/sessions", content=RUNNING)
        assert response.status_code == 413


def test_apply_drill_down_returns_new_dfg(client):
    sid = _create(client)["session_id"]
    response = client.post(f"/api/sessions/{sid}/operations", json=DRILL)
    assert response.status_code == 200
    body = response.json()
    assert body["version"] == 1
    arc_types = {a["object_type"] for a in body["dfg"]["arcs"]}
    assert {"Patient", "Test~type=ECG", "Test~type=Blood"} == arc_types


def test_apply_unknown_type_is_422_without_version(client):
    sid = _create(client)["session_id"]
    response = client.post(
        f"/api/sessions/{sid}/operations",
        json={"kind": "drill-down", "object_type": "Nope", "attribute": "type"},
    )
    assert response.status_code == 422
    assert response.json()["error"] == "UnknownObjectType"
    assert client.get(f"/api/sessions/{sid}").json()["version"] == 0


def test_apply_forgiving_fold_appends_equal_version(client):
    sid = _create(client)["session_id"]
    response = client.post(
        f"/api/sessions/{sid}/operations",
        json={"kind": "fold", "object_type": "Test~type=ECG", "event_type": "ot"},
    )
    assert response.status_code == 200
    assert response.json()["version"] == 1
    v0 = client.get(f"/api/sessions/{sid}/log", params={"version": 0}).content
    v1 = client.get(f"/api/sessions/{sid}/log", params={"version": 1}).content
    assert v0 == v1


def test_apply_malformed_request(client):
    sid = _create(client)["session_id"]
    response = client.post(
        f"/api/sessions/{sid}/operations",
        json={"kind": "drill-down", "object_type": "Test"},
    )
    assert response.status_code == 422
    assert response.json()["error"] == "MalformedRequest"


def test_undo_restores_previous_version(client):
    sid = _create(client)["session_id"]
    client.post(f"/api/sessions/{sid}/operations", json=DRILL)
    response = client.post(f"/api/sessions/{sid}/undo")
    assert response.status_code == 200
    assert response.json()["version"] == 0
    exported = client.get(f"/api/sessions/{sid}/log").content
    assert exported == RUNNING


def test_undo_at_version_zero_conflicts(client):
    sid = _create(client)["session_id"]
    assert client.post(f"/api/sessions/{sid}/undo").status_code == 409


def test_reapply_after_undo_is_deterministic(client):
    sid = _create(client)["session_id"]
    first = client.post(f"/api/sessions/{sid}/operations", json=DRILL).json()
    snapshot = client.get(f"/api/sessions/{sid}/log").content
    client.post(f"/api/sessions/{sid}/undo")
    second = client.post(f"/api/sessions/{sid}/operations", json=DRILL).json()
    assert second["version"] == 1
    assert second["dfg"] == first["dfg"]
    assert client.get(f"/api/sessions/{sid}/log").content == snapshot


def test_get_dfg_versions_and_threshold(client):
    sid = _create(client)["session_id"]
    client.post(f"/api/sessions/{sid}/operations", json=DRILL)
    base = client.get(f"/api/sessions/{sid}/dfg", params={"version": 0}).json()
    assert {a["object_type"] for a in base["arcs"]} == {"Patient", "Test"}
    head = client.get(f"/api/sessions/{sid}/dfg").json()
    assert "Test~type=ECG" in {a["object_type"] for a in head["arcs"]}
    sparse = client.get(
        f"/api/sessions/{sid}/dfg", params={"min_arc_frequency": 3}
    ).json()
    assert sparse["arcs"] == []


def test_get_dot(client):
    sid = _create(client)["session_id"]
    response = client.get(f"/api/sessions/{sid}/dot")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("text/vnd.graphviz")
    assert '"rp" -> "ot" [label="Patient: 1"' in response.text


def test_export_canonical_and_unknown_version(client):
    sid = _create(client)["session_id"]
    assert client.get(f"/api/sessions/{sid}/log").content == RUNNING
    assert (
        client.get(f"/api/sessions/{sid}/log", params={"version": 7}).status_code
        == 404
    )
    assert (
        client.get(f"/api/sessions/{sid}/log", params={"version": "x"}).status_code
        == 404
    )


def test_export_drilled_version_carries_composite_names(client):
    sid = _create(client)["session_id"]
    client.post(f"/api/sessions/{sid}/operations", json=DRILL)
    exported = client.get(f"/api/sessions/{sid}/log", params={"version": 1}).content
    assert b"Test~type=ECG" in exported
    assert b"Test~type=Blood" in exported


def test_unknown_session_is_404(client):
    assert client.get("/api/sessions/nope").status_code == 404
    assert client.post("/api/sessions/nope/undo").status_code == 404
    assert client.post("/api/sessions/nope/operations", json=DRILL).status_code == 404


def test_session_isolation(client):
    a = _create(client)["session_id"]
    b = _create(client)["session_id"]
    client.post(f"/api/sessions/{a}/operations", json=DRILL)
    assert client.get(f"/api/sessions/{b}").json()["version"] == 0
    assert client.get(f"/api/sessions/{b}/log").content == RUNNING


def test_replay_history_reproduces_head(client):
    sid = _create(client)["session_id"]
    for request in [DRILL] + UNFOLDS:
        assert (
            client.post(f"/api/sessions/{sid}/operations", json=request).status_code
            == 200
        )
    head = client.get(f"/api/sessions/{sid}/log").content
    history = client.get(f"/api/sessions/{sid}").json()["history"]
    replay = _create(client)["session_id"]
    for request in history:
        client.post(f"/api/sessions/{replay}/operations", json=request)
    assert client.get(f"/api/sessions/{replay}/log").content == head


def test_version_cap_refuses_with_409():
    app = create_app(ServiceConfig(max_versions=2))
    with TestClient(app) as client:
        sid = _create(client)["session_id"]
        assert (
            client.post(f"/api/sessions/{sid}/operations", json=DRILL).status_code
            == 200
        )
        response = client.post(f"/api/sessions/{sid}/operations", json=DRILL)
        assert response.status_code == 409


def test_idle_sessions_expire():
    app = create_app(ServiceConfig(ttl_seconds=-1))
    with TestClient(app) as client:
        sid = _create(client)["session_id"]
        assert client.get(f"/api/sessions/{sid}").status_code == 404


def test_state_dir_rehydrates_sessions(tmp_path):
    config = ServiceConfig(state_dir=str(tmp_path))
    with TestClient(create_app(config)) as client:
        sid = _create(client)["session_id"]
        client.post(f"/api/sessions/{sid}/operations", json=DRILL)
        head = client.get(f"/api/sessions/{sid}/log").content

    with TestClient(create_app(ServiceConfig(state_dir=str(tmp_path)))) as client:
        info = client.get(f"/api/sessions/{sid}")
        assert info.status_code == 200
        assert info.json()["version"] == 1
        assert client.get(f"/api/sessions/{sid}/log").content == head
        # undo after a restart still works against the replayed stack
        assert client.post(f"/api/sessions/{sid}/undo").json()["version"] == 0
        assert client.get(f"/api/sessions/{sid}/log").content == RUNNING


def test_failed_apply_leaves_no_state(tmp_path):
    config = ServiceConfig(state_dir=str(tmp_path))
    with TestClient(create_app(config)) as client:
        sid = _create(client)["session_id"]
        client.post(
            f"/api/sessions/{sid}/operations",
            json={"kind": "drill-down", "object_type": "Nope", "attribute": "a"},
        )
    with TestClient(create_app(ServiceConfig(state_dir=str(tmp_path)))) as client:
        assert client.get(f"/api/sessions/{sid}").json()["version"] == 0
