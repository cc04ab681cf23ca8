"""Pydantic request/response models for the session service."""

from __future__ import annotations

from typing import List, Literal, Optional

from pydantic import BaseModel, Field


class PoseModel(BaseModel):
    p: List[float] = Field(..., min_length=3, max_length=3)
    q: List[float] = Field(..., min_length=4, max_length=4)


class CreateSessionRequest(BaseModel):
    scene: str
    mode: Literal["free-camera", "robot"] = "free-camera"


class CreateSessionResponse(BaseModel):
    session_id: str
    scene: str
    mode: str
    n_points: int


class PoseUpdateRequest(BaseModel):
    pose: Optional[PoseModel] = None          # free-camera absolute pose
    tcp_target: Optional[PoseModel] = None    # robot-mode IK target
    joints: Optional[List[float]] = None      # robot-mode absolute joints
    extra_axis: Optional[float] = None        # separate extra-axis channel


class QualityDelta(BaseModel):
    index: int
    quality: float


class PoseUpdateResponse(BaseModel):
    changed: List[QualityDelta]
    visible_count: int
    ik_ok: bool
    pose: PoseModel
    joints: Optional[List[float]] = None
    recording: bool
    recorded_samples: int


class RecordingRequest(BaseModel):
    action: Literal["start", "stop", "scrub"]
    fraction: Optional[float] = None


class RecordingResponse(BaseModel):
    status: str
    recording: bool
    samples: int
    stored_paths: int
    warning: Optional[str] = None
    pose: Optional[PoseModel] = None


class EvaluateRequest(BaseModel):
    path_index: int


class EvaluationJobResponse(BaseModel):
    job_id: str
    status: str


class ReportModel(BaseModel):
    schema_version: int = 1
    user_f: float
    user_cost: float
    gcb_f: float
    gcb_plus_f: float
    quality_ratio: float
    opt_metric_user: float
    opt_metric_auto: float
    per_point_quality: List[float]
    auto_order: List[int]
    user_beats_auto: bool


class EvaluationStatusResponse(BaseModel):
    job_id: str
    status: Literal["pending", "running", "done", "error"]
    report: Optional[ReportModel] = None
    error: Optional[str] = None


class PlanRequest(BaseModel):
    scene: str
    budget: float
    improve: bool = True


class PlanResponse(BaseModel):
    indices: List[int]
    order: List[int]
    f: float
    cost: float
    budget: float
    log: List[List[float]]


class SessionStateResponse(BaseModel):
    session_id: str
    scene: str
    mode: str
    pose: PoseModel
    joints: Optional[List[float]] = None
    recording: bool
    recorded_samples: int
    stored_paths: int
    accumulated_total: float


class SceneInfo(BaseModel):
    name: str
    n_points: int
    n_poses: int
    has_chain: bool
