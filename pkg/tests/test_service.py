import numpy as np
import pytest
from fastapi.testclient import TestClient

from inspectplan.scenes import generate_scene
from inspectplan.service.app import create_app

from conftest import pose_looking


@pytest.fixture(scope="module")
def app():
    app = create_app()
    app.state.register_scene(generate_scene("panel", stride=8), "panel")
    app.state.register_scene(
        generate_scene("panel", chain_preset="ur10-table-like", stride=8),
        "panel-robot")
    return app


@pytest.fixture(scope="module")
def client(app):
    with TestClient(app) as c:
        yield c


def _new_session(client, scene="panel", mode="free-camera"):
    r = client.post("/sessions", json={"scene": scene, "mode": mode})
    assert r.status_code == 200
    return r.json()["session_id"]


def _pose_payload(position, at=(0, 0, 0)):
    pose = pose_looking(position, at)
    return {"pose": {"p": pose.position.tolist(),
                     "q": pose.quaternion.tolist()}}


def test_scene_listing(client):
    names = {s["name"]: s for s in client.get("/scenes").json()}
    assert "panel" in names and "panel-robot" in names
    assert not names["panel"]["has_chain"]
    assert names["panel-robot"]["has_chain"]


def test_scene_mesh_and_graph(client):
    mesh = client.get("/scenes/panel/mesh").json()
    assert len(mesh["vertices"]) == len(mesh["normals"])
    assert all(len(t) == 3 for t in mesh["triangles"][:5])
    graph = client.get("/scenes/panel/graph").json()
    assert len(graph["poses"]) > 0
    assert client.get("/scenes/nope/mesh").status_code == 404


def test_unknown_scene_session(client):
    r = client.post("/sessions", json={"scene": "nope", "mode": "free-camera"})
    assert r.status_code == 404


def test_robot_mode_requires_chain(client):
    r = client.post("/sessions", json={"scene": "panel", "mode": "robot"})
    assert r.status_code == 422


def test_pose_update_accumulates(client):
    sid = _new_session(client)
    r = client.post(f"/sessions/{sid}/pose",
                    json=_pose_payload((0, 0, 250), (0, 0, 30)))
    body = r.json()
    assert r.status_code == 200
    assert body["visible_count"] > 0
    assert len(body["changed"]) > 0
    # repeating the identical pose adds nothing new
    r2 = client.post(f"/sessions/{sid}/pose",
                     json=_pose_payload((0, 0, 250), (0, 0, 30)))
    assert r2.json()["changed"] == []


def test_sessions_isolated(client):
    a = _new_session(client)
    b = _new_session(client)
    client.post(f"/sessions/{a}/pose",
                json=_pose_payload((0, 0, 250), (0, 0, 30)))
    qa = client.get(f"/sessions/{a}/quality").json()["values"]
    qb = client.get(f"/sessions/{b}/quality").json()["values"]
    assert sum(qa) > 0
    assert sum(qb) == 0


def test_robot_ik_failure_keeps_state(client):
    sid = _new_session(client, scene="panel-robot", mode="robot")
    before = client.get(f"/sessions/{sid}").json()
    r = client.post(f"/sessions/{sid}/pose", json={
        "tcp_target": {"p": [1e6, 0, 0], "q": [1, 0, 0, 0]}})
    body = r.json()
    assert r.status_code == 200
    assert not body["ik_ok"]
    assert body["changed"] == []
    assert body["joints"] == before["joints"]
    assert body["pose"] == before["pose"]


def test_robot_joint_and_extra_axis_updates(client):
    sid = _new_session(client, scene="panel-robot", mode="robot")
    n = len(client.get(f"/sessions/{sid}").json()["joints"])
    r = client.post(f"/sessions/{sid}/pose", json={"joints": [0.1] * n})
    assert r.status_code == 200
    assert r.json()["ik_ok"]
    r = client.post(f"/sessions/{sid}/pose", json={"extra_axis": 0.5})
    assert r.status_code == 200
    assert r.json()["joints"][0] == pytest.approx(0.5)
    r = client.post(f"/sessions/{sid}/pose", json={})
    assert r.status_code == 422


def test_recording_lifecycle(client):
    sid = _new_session(client)
    assert client.post(f"/sessions/{sid}/recording",
                       json={"action": "start"}).status_code == 200
    # starting twice conflicts
    assert client.post(f"/sessions/{sid}/recording",
                       json={"action": "start"}).status_code == 409
    for i in range(5):
        client.post(f"/sessions/{sid}/pose",
                    json=_pose_payload((i * 30, 0, 250), (0, 0, 30)))
    r = client.post(f"/sessions/{sid}/recording", json={"action": "stop"})
    body = r.json()
    assert body["samples"] == 5
    assert body["stored_paths"] == 1
    # stopping again conflicts
    assert client.post(f"/sessions/{sid}/recording",
                       json={"action": "stop"}).status_code == 409


def test_stop_empty_recording_warns(client):
    sid = _new_session(client)
    client.post(f"/sessions/{sid}/recording", json={"action": "start"})
    body = client.post(f"/sessions/{sid}/recording",
                       json={"action": "stop"}).json()
    assert body["stored_paths"] == 0
    assert body["warning"]


def test_scrub_restores_recorded_pose(client):
    sid = _new_session(client)
    client.post(f"/sessions/{sid}/recording", json={"action": "start"})
    for i in range(11):
        client.post(f"/sessions/{sid}/pose",
                    json=_pose_payload((i * 30, 0, 250), (0, 0, 30)))
    client.post(f"/sessions/{sid}/recording", json={"action": "stop"})
    body = client.post(f"/sessions/{sid}/recording",
                       json={"action": "scrub", "fraction": 0.5}).json()
    assert body["status"] == "scrubbed"
    assert body["pose"]["p"][0] == pytest.approx(150.0)
    # scrub with nothing recorded conflicts
    other = _new_session(client)
    assert client.post(f"/sessions/{other}/recording",
                       json={"action": "scrub", "fraction": 0.5}
                       ).status_code == 409


def _record_plan_replay(client, sid, budget=1500.0):
    plan = client.post("/plan", json={"scene": "panel",
                                      "budget": budget}).json()
    graph = client.get("/scenes/panel/graph").json()
    client.post(f"/sessions/{sid}/recording", json={"action": "start"})
    for i in plan["order"]:
        client.post(f"/sessions/{sid}/pose",
                    json={"pose": graph["poses"][i]})
    client.post(f"/sessions/{sid}/recording", json={"action": "stop"})
    return plan


def test_evaluate_sync_round_trip(client):
    sid = _new_session(client)
    _record_plan_replay(client, sid)
    r = client.post(f"/sessions/{sid}/evaluate", json={"path_index": 0})
    assert r.status_code == 200
    report = r.json()
    assert report["schema_version"] == 1
    assert 0.9 <= report["quality_ratio"] <= 1.1
    assert client.post(f"/sessions/{sid}/evaluate",
                       json={"path_index": 5}).status_code == 404


def test_evaluate_async_job(client):
    sid = _new_session(client)
    _record_plan_replay(client, sid)
    job = client.post(f"/sessions/{sid}/evaluations",
                      json={"path_index": 0}).json()
    import time
    for _ in range(200):
        status = client.get(
            f"/sessions/{sid}/evaluations/{job['job_id']}").json()
        if status["status"] != "running":
            break
        time.sleep(0.05)
    assert status["status"] == "done"
    assert status["report"]["quality_ratio"] > 0
    assert client.get(
        f"/sessions/{sid}/evaluations/nope").status_code == 404


def test_plan_endpoint(client):
    zero = client.post("/plan", json={"scene": "panel", "budget": 0}).json()
    assert len(zero["order"]) <= 1
    big = client.post("/plan", json={"scene": "panel", "budget": 1e8}).json()
    assert big["f"] >= zero["f"]
    again = client.post("/plan", json={"scene": "panel",
                                       "budget": 1e8}).json()
    assert again == big
    assert client.post("/plan", json={"scene": "panel",
                                      "budget": -1}).status_code == 422


def test_delta_replay_reconstructs_quality(client, app):
    sid = _new_session(client)
    for i in range(4):
        client.post(f"/sessions/{sid}/pose",
                    json=_pose_payload((i * 60 - 90, 40, 260), (0, 0, 30)))
    sess = app.state.sessions[sid]
    rebuilt = np.zeros(len(sess.scene.points))
    for batch in sess.delta_log:
        for idx, q in batch:
            rebuilt[idx] = q
    server = client.get(f"/sessions/{sid}/quality").json()["values"]
    np.testing.assert_allclose(rebuilt, server, atol=1e-12)


def test_websocket_streams_deltas(client):
    sid = _new_session(client)
    client.post(f"/sessions/{sid}/pose",
                json=_pose_payload((0, 0, 250), (0, 0, 30)))
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        msg = ws.receive_json()
        assert len(msg["deltas"]) > 0
        idx, q = msg["deltas"][0]
        assert 0.0 < q <= 1.0
    with client.websocket_connect("/sessions/nope/stream") as ws:
        assert "error" in ws.receive_json()


def test_session_snapshot_written(tmp_path):
    app = create_app(session_store=tmp_path)
    app.state.register_scene(generate_scene("panel", stride=8), "panel")
    with TestClient(app) as c:
        sid = _new_session(c)
        c.post(f"/sessions/{sid}/recording", json={"action": "start"})
        c.post(f"/sessions/{sid}/pose",
               json=_pose_payload((0, 0, 250), (0, 0, 30)))
        c.post(f"/sessions/{sid}/recording", json={"action": "stop"})
    snap = tmp_path / f"{sid}.json"
    assert snap.exists()
    import json
    data = json.loads(snap.read_text())
    assert data["scene"] == "panel"
    assert len(data["paths"]) == 1
