"""FastAPI session service.

Wraps the core package: scene registry, per-session interactive quality
accumulation, path recording with scrubbing, planning and evaluation.
Each session's mutations are serialized behind a lock; quality updates are
streamed as changed-vertex deltas over a websocket.
"""

from __future__ import annotations

import asyncio
import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from ..evaluator import RecordedPath, evaluate
from ..kinematics import forward, solve_ik
from ..planner import PlanningProblem, gcb, gcb_plus
from ..quality import AccumulatedQuality, point_qualities, quality_matrix
from ..scenes import Scene
from ..visibility import ViewPose, render_depth, visible_points
from .models import (CreateSessionRequest, CreateSessionResponse,
                     EvaluateRequest, EvaluationJobResponse,
                     EvaluationStatusResponse, PlanRequest, PlanResponse,
                     PoseModel, PoseUpdateRequest, PoseUpdateResponse,
                     QualityDelta, RecordingRequest, RecordingResponse,
                     ReportModel, SceneInfo, SessionStateResponse)


class SessionState:
    def __init__(self, session_id, scene_name, scene, mode):
        self.id = session_id
        self.scene_name = scene_name
        self.scene = scene
        self.mode = mode
        self.lock = threading.Lock()
        self.acc = AccumulatedQuality.zeros(len(scene.points))
        self.recording = False
        self.rec_poses = []
        self.rec_times = []
        self.rec_joints = []
        self.paths = []
        self.clock = 0.0
        self.delta_log = []  # batches of [index, quality] pairs
        if mode == "robot":
            if scene.chain is None:
                raise ValueError("scene has no kinematic chain")
            self.joints = np.zeros(scene.chain.n_joints)
            self.pose = forward(scene.chain, self.joints)
        else:
            self.joints = None
            bbox_top = scene.mesh.vertices.mean(axis=0)
            self.pose = ViewPose(position=bbox_top + (0, 0, 4 * scene.model.d_opt),
                                 quaternion=(1, 0, 0, 0))

    def pose_model(self):
        return PoseModel(p=self.pose.position.tolist(),
                         q=self.pose.quaternion.tolist())


def _report_model(report):
    d = report.to_dict()
    d["schema_version"] = d.pop("schema")
    return ReportModel(**d)


def create_app(scene_dir=None, session_store=None):
    app = FastAPI(title="inspectplan session service")
    app.state.scenes = {}
    app.state.sessions = {}
    app.state.jobs = {}
    app.state.executor = ThreadPoolExecutor(max_workers=2)
    app.state.session_store = Path(session_store) if session_store else None

    if scene_dir:
        for sub in sorted(Path(scene_dir).iterdir()):
            if (sub / "scene.json").exists():
                app.state.scenes[sub.name] = Scene.load(sub)

    def register_scene(scene, name=None):
        app.state.scenes[name or scene.name] = scene

    app.state.register_scene = register_scene

    def get_scene(name):
        scene = app.state.scenes.get(name)
        if scene is None:
            raise HTTPException(status_code=404, detail=f"unknown scene {name!r}")
        return scene

    def get_session(session_id):
        sess = app.state.sessions.get(session_id)
        if sess is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return sess

    @app.get("/scenes")
    def list_scenes() -> list[SceneInfo]:
        return [SceneInfo(name=name, n_points=len(s.points),
                          n_poses=s.graph.k, has_chain=s.chain is not None)
                for name, s in app.state.scenes.items()]

    @app.get("/scenes/{name}/mesh")
    def scene_mesh(name: str):
        scene = get_scene(name)
        return {
            "vertices": scene.mesh.vertices.tolist(),
            "triangles": scene.mesh.triangles.tolist(),
            "normals": scene.mesh.normals.tolist(),
        }

    @app.get("/scenes/{name}/graph")
    def scene_graph(name: str):
        return json.loads(get_scene(name).graph.to_json())

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest) -> CreateSessionResponse:
        scene = get_scene(req.scene)
        session_id = uuid.uuid4().hex
        try:
            sess = SessionState(session_id, req.scene, scene, req.mode)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        app.state.sessions[session_id] = sess
        return CreateSessionResponse(session_id=session_id, scene=req.scene,
                                     mode=req.mode, n_points=len(scene.points))

    @app.get("/sessions/{session_id}")
    def session_state(session_id: str) -> SessionStateResponse:
        sess = get_session(session_id)
        with sess.lock:
            return SessionStateResponse(
                session_id=sess.id, scene=sess.scene_name, mode=sess.mode,
                pose=sess.pose_model(),
                joints=None if sess.joints is None else sess.joints.tolist(),
                recording=sess.recording,
                recorded_samples=len(sess.rec_poses),
                stored_paths=len(sess.paths),
                accumulated_total=sess.acc.total)

    @app.get("/sessions/{session_id}/quality")
    def session_quality(session_id: str):
        sess = get_session(session_id)
        with sess.lock:
            return {"values": sess.acc.values.tolist()}

    def _apply_pose(sess, pose):
        """Accumulate quality at a pose; returns (deltas, visible count)."""
        scene = sess.scene
        depth = render_depth(scene.mesh, pose, scene.cam)
        mask = visible_points(scene.points, pose, scene.cam, depth)
        q = point_qualities(scene.points, pose, scene.model, mask)
        changed = np.nonzero(q > sess.acc.values)[0]
        sess.acc.values[changed] = q[changed]
        sess.acc.last_pose = pose
        sess.pose = pose
        deltas = [[int(i), float(sess.acc.values[i])] for i in changed]
        if deltas:
            sess.delta_log.append(deltas)
        return deltas, int(mask.sum())

    @app.post("/sessions/{session_id}/pose")
    def update_pose(session_id: str, req: PoseUpdateRequest) -> PoseUpdateResponse:
        sess = get_session(session_id)
        with sess.lock:
            ik_ok = True
            if sess.mode == "robot":
                chain = sess.scene.chain
                target_joints = None
                if req.joints is not None:
                    if len(req.joints) != chain.n_joints:
                        raise HTTPException(status_code=422,
                                            detail="joint count mismatch")
                    target_joints = chain.clamp(np.asarray(req.joints, float))
                elif req.extra_axis is not None:
                    if chain.extra_axis_index is None:
                        raise HTTPException(status_code=422,
                                            detail="chain has no extra axis")
                    target_joints = sess.joints.copy()
                    target_joints[chain.extra_axis_index] = req.extra_axis
                    target_joints = chain.clamp(target_joints)
                elif req.tcp_target is not None:
                    target = ViewPose(position=req.tcp_target.p,
                                      quaternion=req.tcp_target.q)
                    result = solve_ik(chain, target, sess.joints)
                    if result.success:
                        target_joints = result.state
                    else:
                        ik_ok = False
                else:
                    raise HTTPException(status_code=422,
                                        detail="robot mode needs tcp_target, "
                                               "joints or extra_axis")
                if ik_ok and target_joints is not None:
                    sess.joints = target_joints
                    pose = forward(chain, sess.joints)
                else:
                    # IK failed: state unchanged, the robot stops moving
                    pose = sess.pose
            else:
                if req.pose is None:
                    raise HTTPException(status_code=422,
                                        detail="free-camera mode needs a pose")
                try:
                    pose = ViewPose(position=req.pose.p, quaternion=req.pose.q)
                except ValueError as exc:
                    raise HTTPException(status_code=422, detail=str(exc))
            if ik_ok:
                deltas, visible = _apply_pose(sess, pose)
                if sess.recording:
                    sess.clock += 1.0
                    sess.rec_poses.append(sess.pose)
                    sess.rec_times.append(sess.clock)
                    sess.rec_joints.append(None if sess.joints is None
                                           else sess.joints.copy())
            else:
                deltas, visible = [], 0
            return PoseUpdateResponse(
                changed=[QualityDelta(index=i, quality=q) for i, q in deltas],
                visible_count=visible, ik_ok=ik_ok, pose=sess.pose_model(),
                joints=None if sess.joints is None else sess.joints.tolist(),
                recording=sess.recording,
                recorded_samples=len(sess.rec_poses))

    @app.post("/sessions/{session_id}/recording")
    def recording(session_id: str, req: RecordingRequest) -> RecordingResponse:
        sess = get_session(session_id)
        with sess.lock:
            if req.action == "start":
                if sess.recording:
                    raise HTTPException(status_code=409,
                                        detail="a recording is already running")
                sess.recording = True
                sess.rec_poses, sess.rec_times, sess.rec_joints = [], [], []
                return RecordingResponse(status="recording", recording=True,
                                         samples=0,
                                         stored_paths=len(sess.paths))
            if req.action == "stop":
                if not sess.recording:
                    raise HTTPException(status_code=409,
                                        detail="no recording in progress")
                sess.recording = False
                warning = None
                if sess.rec_poses:
                    path = RecordedPath(poses=list(sess.rec_poses),
                                        timestamps=list(sess.rec_times),
                                        joint_states=list(sess.rec_joints))
                    sess.paths.append(path)
                    _snapshot_session(sess)
                else:
                    warning = "empty recording discarded"
                return RecordingResponse(status="stopped", recording=False,
                                         samples=len(sess.rec_poses),
                                         stored_paths=len(sess.paths),
                                         warning=warning)
            # scrub: jump to a stored sample of the in-progress recording
            samples = sess.rec_poses or (sess.paths[-1].poses if sess.paths
                                         else [])
            if not samples:
                raise HTTPException(status_code=409, detail="nothing recorded")
            fraction = 0.0 if req.fraction is None else req.fraction
            idx = int(round(np.clip(fraction, 0, 1) * (len(samples) - 1)))
            sess.pose = samples[idx]
            if sess.mode == "robot":
                joints = (sess.rec_joints or sess.paths[-1].joint_states)[idx]
                if joints is not None:
                    sess.joints = np.asarray(joints, float)
            return RecordingResponse(status="scrubbed", recording=sess.recording,
                                     samples=len(samples),
                                     stored_paths=len(sess.paths),
                                     pose=sess.pose_model())

    def _snapshot_session(sess):
        store = app.state.session_store
        if store is None:
            return
        store.mkdir(parents=True, exist_ok=True)
        snap = {
            "session_id": sess.id,
            "scene": sess.scene_name,
            "mode": sess.mode,
            "paths": [json.loads(p.to_json()) for p in sess.paths],
            "accumulated": sess.acc.values.tolist(),
        }
        (store / f"{sess.id}.json").write_text(json.dumps(snap))

    def _run_evaluation(sess, path_index):
        scene = sess.scene
        path = sess.paths[path_index]
        return evaluate(path, scene.mesh, scene.points, scene.cam,
                        scene.model, scene.graph, scene.cost_model)

    @app.post("/sessions/{session_id}/evaluate")
    def evaluate_sync(session_id: str, req: EvaluateRequest) -> ReportModel:
        sess = get_session(session_id)
        if not (0 <= req.path_index < len(sess.paths)):
            raise HTTPException(status_code=404, detail="no such stored path")
        report = _run_evaluation(sess, req.path_index)
        return _report_model(report)

    @app.post("/sessions/{session_id}/evaluations")
    def evaluate_async(session_id: str, req: EvaluateRequest) -> EvaluationJobResponse:
        sess = get_session(session_id)
        if not (0 <= req.path_index < len(sess.paths)):
            raise HTTPException(status_code=404, detail="no such stored path")
        job_id = uuid.uuid4().hex
        app.state.jobs[job_id] = {"status": "running", "report": None,
                                  "error": None}

        def work():
            try:
                report = _run_evaluation(sess, req.path_index)
                app.state.jobs[job_id].update(status="done", report=report)
            except Exception as exc:  # surfaced through the status endpoint
                app.state.jobs[job_id].update(status="error", error=str(exc))

        app.state.executor.submit(work)
        return EvaluationJobResponse(job_id=job_id, status="running")

    @app.get("/sessions/{session_id}/evaluations/{job_id}")
    def evaluation_status(session_id: str, job_id: str) -> EvaluationStatusResponse:
        get_session(session_id)
        job = app.state.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job")
        report = job["report"]
        return EvaluationStatusResponse(
            job_id=job_id, status=job["status"],
            report=None if report is None else _report_model(report),
            error=job["error"])

    @app.post("/plan")
    def plan(req: PlanRequest) -> PlanResponse:
        scene = get_scene(req.scene)
        if req.budget < 0:
            raise HTTPException(status_code=422, detail="budget must be >= 0")
        qm = quality_matrix(scene.points, scene.graph.poses, scene.mesh,
                            scene.cam, scene.model)
        problem = PlanningProblem(graph=scene.graph, qm=qm,
                                  cost_model=scene.cost_model,
                                  budget=req.budget)
        solution = gcb(problem)
        if req.improve:
            solution = gcb_plus(problem, solution)
        return PlanResponse(indices=solution.indices, order=solution.order,
                            f=solution.f_value, cost=solution.cost,
                            budget=solution.budget,
                            log=[[float(i), float(g), float(c)]
                                 for i, g, c in solution.log])

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str):
        sess = app.state.sessions.get(session_id)
        await websocket.accept()
        if sess is None:
            await websocket.send_json({"error": "unknown session"})
            await websocket.close()
            return
        sent = 0
        try:
            while True:
                with sess.lock:
                    batches = sess.delta_log[sent:]
                for batch in batches:
                    await websocket.send_json({"deltas": batch})
                    sent += 1
                await asyncio.sleep(0.02)
        except WebSocketDisconnect:
            return

    return app
