"""Record a scripted drive session against the real service over HTTP.

The resulting JSON is the frontend test fixture: every message the client
would see on the wire, plus the service's own final accumulation vector
and evaluation report to compare against. Regenerate with:

    python3 frontend/scripts/capture_fixture.py
"""

import json
import math
from pathlib import Path

from fastapi.testclient import TestClient

from inspectplan.scenes import generate_scene
from inspectplan.service.app import create_app
from inspectplan.transforms import look_rotation, matrix_to_quat

OUT = Path(__file__).resolve().parent.parent / "test" / "fixtures" / "drive_session.json"


def orbit_pose(i, n=8, radius=450.0, height=120.0):
    angle = 2 * math.pi * i / n
    p = [radius * math.sin(angle), -radius * math.cos(angle), height + 150.0]
    q = matrix_to_quat(look_rotation([-p[0], -p[1], 30.0 - p[2]]))
    return {"p": p, "q": [float(v) for v in q]}


def main():
    app = create_app()
    app.state.register_scene(generate_scene("panel", stride=8), "panel")
    app.state.register_scene(
        generate_scene("panel", chain_preset="ur10-table-like", stride=8),
        "panel-robot")

    with TestClient(app) as client:
        created = client.post("/sessions", json={
            "scene": "panel", "mode": "free-camera"}).json()
        sid = created["session_id"]
        client.post(f"/sessions/{sid}/recording", json={"action": "start"})
        updates = []
        for i in range(8):
            res = client.post(f"/sessions/{sid}/pose",
                              json={"pose": orbit_pose(i)}).json()
            updates.append(res)
        stop = client.post(f"/sessions/{sid}/recording",
                           json={"action": "stop"}).json()
        quality = client.get(f"/sessions/{sid}/quality").json()["values"]
        report = client.post(f"/sessions/{sid}/evaluate",
                             json={"path_index": 0}).json()
        with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
            stream = [ws.receive_json()["deltas"]
                      for _ in range(sum(1 for u in updates if u["changed"]))]

        robot = client.post("/sessions", json={
            "scene": "panel-robot", "mode": "robot"}).json()
        rid = robot["session_id"]
        before = client.get(f"/sessions/{rid}").json()
        fail = client.post(f"/sessions/{rid}/pose", json={
            "tcp_target": {"p": [1e6, 0, 0], "q": [1, 0, 0, 0]}}).json()

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({
        "n_points": created["n_points"],
        "updates": updates,
        "stop": stop,
        "final_quality": quality,
        "report": report,
        "stream_batches": stream,
        "robot_before": before,
        "robot_ik_failure": fail,
    }))
    print(f"wrote {OUT} ({OUT.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
