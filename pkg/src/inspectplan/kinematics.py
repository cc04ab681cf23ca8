"""Serial-chain forward kinematics and damped least squares IK.

Chains are lists of revolute or prismatic joints, each with a fixed origin
transform and a motion axis, plus a TCP offset.  IK is iterative DLS on a
numerical Jacobian; failure is a value, and callers keep their seed state
when the solve fails.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .transforms import (axis_angle_quat, matrix_to_quat, quat_to_matrix,
                         rigid_matrix, rotation_vector)
from .visibility import ViewPose

REVOLUTE = "revolute"
PRISMATIC = "prismatic"


@dataclass(frozen=True)
class Joint:
    kind: str
    axis: np.ndarray          # unit 3-vector in the joint's local frame
    origin: np.ndarray        # 4x4 transform from parent
    limits: tuple             # (lo, hi), rad or mm

    def __post_init__(self):
        if self.kind not in (REVOLUTE, PRISMATIC):
            raise ValueError(f"unknown joint kind {self.kind!r}")
        axis = np.asarray(self.axis, dtype=np.float64).reshape(3)
        n = np.linalg.norm(axis)
        if abs(n - 1.0) > 1e-6:
            raise ValueError("joint axis must be unit length")
        object.__setattr__(self, "axis", axis / n)
        object.__setattr__(self, "origin",
                           np.asarray(self.origin, dtype=np.float64).reshape(4, 4))
        lo, hi = self.limits
        if not lo < hi:
            raise ValueError("joint limits need lo < hi")

    def motion(self, q):
        T = np.eye(4)
        if self.kind == REVOLUTE:
            T[:3, :3] = quat_to_matrix(axis_angle_quat(self.axis, q))
        else:
            T[:3, 3] = q * self.axis
        return T


@dataclass(frozen=True)
class KinematicChain:
    joints: tuple
    tcp: np.ndarray                 # 4x4 TCP offset
    extra_axis_index: int = None    # joint driven by the separate UI channel

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "tcp",
                           np.asarray(self.tcp, dtype=np.float64).reshape(4, 4))

    @property
    def n_joints(self):
        return len(self.joints)

    def clamp(self, state):
        lo = np.array([j.limits[0] for j in self.joints])
        hi = np.array([j.limits[1] for j in self.joints])
        return np.clip(state, lo, hi)

    def within_limits(self, state, tol=1e-9):
        lo = np.array([j.limits[0] for j in self.joints])
        hi = np.array([j.limits[1] for j in self.joints])
        return bool(np.all(state >= lo - tol) and np.all(state <= hi + tol))

    def random_state(self, rng):
        lo = np.array([j.limits[0] for j in self.joints])
        hi = np.array([j.limits[1] for j in self.joints])
        return rng.uniform(lo, hi)

    def to_dict(self):
        def pose_of(T):
            return {"p": T[:3, 3].tolist(),
                    "q": matrix_to_quat(T[:3, :3]).tolist()}
        return {
            "joints": [{
                "type": j.kind,
                "axis": j.axis.tolist(),
                "origin": pose_of(j.origin),
                "limits": list(j.limits),
            } for j in self.joints],
            "tcp": pose_of(self.tcp),
            "extra_axis_index": self.extra_axis_index,
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        joints = []
        for jd in d["joints"]:
            origin = rigid_matrix(jd["origin"]["p"], jd["origin"]["q"])
            joints.append(Joint(kind=jd["type"], axis=jd["axis"],
                                origin=origin, limits=tuple(jd["limits"])))
        tcp = rigid_matrix(d["tcp"]["p"], d["tcp"]["q"])
        return cls(joints=tuple(joints), tcp=tcp,
                   extra_axis_index=d.get("extra_axis_index"))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def forward_matrix(chain, state):
    """TCP transform for a joint state, as a 4x4 matrix."""
    state = np.asarray(state, dtype=np.float64)
    if state.shape != (chain.n_joints,):
        raise ValueError(f"state length {state.shape} does not match "
                         f"{chain.n_joints} joints")
    T = np.eye(4)
    for joint, q in zip(chain.joints, state):
        T = T @ joint.origin @ joint.motion(q)
    return T @ chain.tcp


def forward(chain, state):
    """TCP pose for a joint state."""
    T = forward_matrix(chain, state)
    return ViewPose(position=T[:3, 3], quaternion=matrix_to_quat(T[:3, :3]))


def _pose_error(chain, state, target):
    T = forward_matrix(chain, state)
    e_p = target.position - T[:3, 3]
    e_o = rotation_vector(target.rotation @ T[:3, :3].T)
    return e_p, e_o


def numeric_jacobian(chain, state, w_o, h=1e-5):
    """Central-difference Jacobian of (position, w_o * orientation)."""
    n = chain.n_joints
    J = np.zeros((6, n))
    for i in range(n):
        dq = np.zeros(n)
        dq[i] = h
        Tp = forward_matrix(chain, state + dq)
        Tm = forward_matrix(chain, state - dq)
        J[:3, i] = (Tp[:3, 3] - Tm[:3, 3]) / (2 * h)
        J[3:, i] = w_o * rotation_vector(Tp[:3, :3] @ Tm[:3, :3].T) / (2 * h)
    return J


@dataclass
class IKResult:
    success: bool
    state: np.ndarray
    position_error: float
    orientation_error: float
    iterations: int


def dls_step(J, e, damping):
    """One damped least squares update; finite for any J and damping > 0."""
    JJt = J @ J.T + damping**2 * np.eye(J.shape[0])
    return J.T @ np.linalg.solve(JJt, e)


def _dls_attempt(chain, target, state, damping, iters, tol_p, tol_o, w_o,
                 max_step, stall_window):
    """One DLS descent; gives up early when the error stops improving."""
    state = chain.clamp(np.asarray(state, dtype=np.float64).copy())
    best_err, best_it = np.inf, 0
    best = None
    for it in range(iters + 1):
        e_p, e_o = _pose_error(chain, state, target)
        pe, oe = np.linalg.norm(e_p), np.linalg.norm(e_o)
        err = pe + w_o * oe
        if err < best_err * (1.0 - 1e-3):
            best_err, best_it = err, it
        if best is None or err <= best[0]:
            best = (err, state.copy(), pe, oe)
        if pe <= tol_p and oe <= tol_o:
            return IKResult(True, state, pe, oe, it)
        if it == iters or it - best_it > stall_window:
            break
        e = np.concatenate([e_p, w_o * e_o])
        J = numeric_jacobian(chain, state, w_o)
        dq = dls_step(J, e, damping)
        norm = np.linalg.norm(dq)
        if norm > max_step:
            dq *= max_step / norm
        state = chain.clamp(state + dq)
    _, bstate, pe, oe = best
    return IKResult(False, bstate, pe, oe, it)


def solve_ik(chain, target, seed, damping=0.1, iters=200,
             tol_p=1.0, tol_o=0.01, w_o=100.0, max_step=0.5,
             restarts=60, stall_window=12):
    """Damped least squares IK toward a target TCP pose.

    Joint updates are clamped to limits every iteration and the step norm is
    capped for stability.  DLS is a local method, so a stalled descent is
    retried from joint states drawn deterministically from the seed; the
    result is still a pure function of the inputs.  On failure the caller
    should keep its seed state.
    """
    if damping <= 0:
        raise ValueError("damping must be > 0")
    seed = np.asarray(seed, dtype=np.float64)
    result = _dls_attempt(chain, target, seed, damping, iters, tol_p, tol_o,
                          w_o, max_step, stall_window)
    if result.success:
        return result
    best = result
    rng = np.random.default_rng(
        np.abs(np.concatenate([seed, target.position])).view(np.uint64))
    for _ in range(restarts):
        attempt = _dls_attempt(chain, target, chain.random_state(rng),
                               damping, iters, tol_p, tol_o, w_o, max_step,
                               stall_window)
        if attempt.success:
            return attempt
        if attempt.position_error + w_o * attempt.orientation_error \
                < best.position_error + w_o * best.orientation_error:
            best = attempt
    return best


@dataclass
class JointTrajectory:
    """Recorded joint states; lossless, scrubbed by normalized index."""

    samples: list = field(default_factory=list)

    def append(self, state):
        self.samples.append(np.asarray(state, dtype=np.float64).copy())

    def __len__(self):
        return len(self.samples)


def scrub(trajectory, fraction):
    """Stored joint state at a normalized position, nearest sample."""
    samples = trajectory.samples if isinstance(trajectory, JointTrajectory) \
        else list(trajectory)
    if not samples:
        raise ValueError("empty trajectory")
    fraction = float(np.clip(fraction, 0.0, 1.0))
    idx = int(round(fraction * (len(samples) - 1)))
    return np.asarray(samples[idx], dtype=np.float64)


def _revolute(axis, origin_p, limits=(-np.pi, np.pi)):
    return Joint(kind=REVOLUTE, axis=axis,
                 origin=rigid_matrix(origin_p, (1, 0, 0, 0)), limits=limits)


def preset_chain(name):
    """Bundled desk-scale chains: "kr16-like" (6R) and "ur10-table-like"
    (rotary base axis + 6R).  Invented geometry, mm link lengths.
    """
    if name == "kr16-like":
        joints = (
            _revolute((0, 0, 1), (0, 0, 400)),
            _revolute((0, 1, 0), (150, 0, 0), (-2.0, 2.0)),
            _revolute((0, 1, 0), (0, 0, 600), (-2.6, 2.6)),
            _revolute((1, 0, 0), (100, 0, 100)),
            _revolute((0, 1, 0), (500, 0, 0), (-2.1, 2.1)),
            _revolute((1, 0, 0), (80, 0, 0)),
        )
        tcp = rigid_matrix((120, 0, 0), axis_angle_quat((0, 1, 0), np.pi / 2))
        return KinematicChain(joints=joints, tcp=tcp)
    if name == "ur10-table-like":
        joints = (
            # rotary table the workpiece sits next to; separate UI channel
            _revolute((0, 0, 1), (0, 0, 0)),
            _revolute((0, 0, 1), (400, 0, 120)),
            _revolute((0, 1, 0), (0, 0, 80), (-2.8, 2.8)),
            _revolute((0, 1, 0), (0, 0, 610), (-2.8, 2.8)),
            _revolute((0, 1, 0), (0, 0, 570), (-2.8, 2.8)),
            _revolute((0, 0, 1), (0, 110, 0)),
            _revolute((0, 1, 0), (0, 0, 120)),
        )
        tcp = rigid_matrix((0, 80, 0), axis_angle_quat((1, 0, 0), -np.pi / 2))
        return KinematicChain(joints=joints, tcp=tcp, extra_axis_index=0)
    raise ValueError(f"unknown preset chain {name!r}")


def load_chain(path):
    return KinematicChain.from_json(Path(path).read_text())
