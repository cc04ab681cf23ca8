"""Scoring of human-recorded paths against budget-matched automated plans.

The recorded path is resampled, its quality accumulated point by point and
its budget charged along the recorded order.  The workspace graph is then
augmented with the recorded poses and the automated solver runs with the
same budget, so both solutions inhabit one problem and their quality ratio
is a fair comparison.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .quality import AccumulatedQuality, objective_f, point_qualities
from .planner import (DEFAULT_KAPPA, PlanningProblem, gcb, gcb_plus,
                      opt_metric)
from .transforms import quat_angle
from .viewgraph import edge_cost, graph_from_edges
from .visibility import ViewPose


@dataclass
class RecordedPath:
    """Ordered view poses with timestamps, as recorded by a session."""

    poses: list
    timestamps: list = None
    joint_states: list = None  # optional per-sample joint snapshots

    def __post_init__(self):
        if len(self.poses) < 1:
            raise ValueError("recorded path needs at least one pose")
        if self.timestamps is None:
            self.timestamps = list(range(len(self.poses)))
        if len(self.timestamps) != len(self.poses):
            raise ValueError("timestamp count does not match pose count")
        if any(b < a for a, b in zip(self.timestamps, self.timestamps[1:])):
            raise ValueError("timestamps must be non-decreasing")

    def __len__(self):
        return len(self.poses)

    def positions(self):
        return np.array([p.position for p in self.poses])

    def to_json(self):
        return json.dumps({
            "schema": 1,
            "poses": [p.to_dict() for p in self.poses],
            "timestamps": list(self.timestamps),
        })

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(poses=[ViewPose.from_dict(p) for p in d["poses"]],
                   timestamps=d.get("timestamps"))


# published schema for report JSON consumers
REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema", "user_f", "user_cost", "gcb_f", "gcb_plus_f",
                 "quality_ratio", "opt_metric_user", "opt_metric_auto",
                 "per_point_quality", "auto_order", "user_beats_auto"],
    "properties": {
        "schema": {"const": 1},
        "user_f": {"type": "number", "minimum": 0},
        "user_cost": {"type": "number", "minimum": 0},
        "gcb_f": {"type": "number", "minimum": 0},
        "gcb_plus_f": {"type": "number", "minimum": 0},
        "quality_ratio": {"type": "number", "minimum": 0},
        "opt_metric_user": {"type": "number", "minimum": 0},
        "opt_metric_auto": {"type": "number", "minimum": 0},
        "per_point_quality": {"type": "array",
                              "items": {"type": "number", "minimum": 0}},
        "auto_order": {"type": "array", "items": {"type": "integer"}},
        "user_beats_auto": {"type": "boolean"},
    },
}


@dataclass
class EvaluationReport:
    user_f: float
    user_cost: float
    gcb_f: float
    gcb_plus_f: float
    quality_ratio: float
    opt_metric_user: float
    opt_metric_auto: float
    per_point_quality: np.ndarray
    auto_order: list = field(default_factory=list)
    auto_positions: list = field(default_factory=list)
    user_beats_auto: bool = False

    def to_dict(self):
        return {
            "schema": 1,
            "user_f": self.user_f,
            "user_cost": self.user_cost,
            "gcb_f": self.gcb_f,
            "gcb_plus_f": self.gcb_plus_f,
            "quality_ratio": self.quality_ratio,
            "opt_metric_user": self.opt_metric_user,
            "opt_metric_auto": self.opt_metric_auto,
            "per_point_quality": [float(v) for v in self.per_point_quality],
            "auto_order": [int(i) for i in self.auto_order],
            "user_beats_auto": self.user_beats_auto,
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def resample_path(path, spacing, rot_scale=0.0):
    """Downsample so consecutive motion gaps are about `spacing` mm.

    Motion between samples is positional arc length plus rot_scale times
    the rotation angle, so a pose that swings the view without moving still
    counts as motion when rot_scale is the viewing distance.  First and
    last samples are always kept; each kept sample carries the orientation
    and timestamp of its original.
    """
    if spacing <= 0:
        raise ValueError("spacing must be > 0")
    if len(path) <= 2:
        return path
    keep = [0]
    acc = 0.0
    pos = path.positions()
    for i in range(1, len(path)):
        acc += float(np.linalg.norm(pos[i] - pos[i - 1]))
        if rot_scale > 0.0:
            acc += rot_scale * quat_angle(path.poses[i].quaternion,
                                          path.poses[i - 1].quaternion)
        if acc >= spacing:
            keep.append(i)
            acc = 0.0
    if keep[-1] != len(path) - 1:
        keep.append(len(path) - 1)
    return RecordedPath(
        poses=[path.poses[i] for i in keep],
        timestamps=[path.timestamps[i] for i in keep],
        joint_states=None if path.joint_states is None
        else [path.joint_states[i] for i in keep],
    )


def augment_graph(graph, path, d_link):
    """Insert the recorded poses into the workspace graph.

    Cross edges link each recorded pose to every original pose closer than
    d_link; consecutive recorded poses are always connected.  Returns the
    new graph and the indices of the recorded poses within it.
    """
    path_poses = path.poses if isinstance(path, RecordedPath) else list(path)
    if len(path_poses) == 0:
        return graph, []
    k0 = graph.k
    poses = list(graph.poses) + list(path_poses)
    edges = list(graph.edges)
    orig_pos = graph.positions()
    for u, pose in enumerate(path_poses):
        gi = k0 + u
        d = np.linalg.norm(orig_pos - pose.position, axis=1)
        for j in np.nonzero(d < d_link)[0]:
            edges.append((int(j), gi, edge_cost(graph.poses[j], pose,
                                                graph.beta)))
        if u > 0:
            edges.append((gi - 1, gi, edge_cost(path_poses[u - 1], pose,
                                                graph.beta)))
    new_graph = graph_from_edges(poses, edges, graph.beta)
    return new_graph, list(range(k0, k0 + len(path_poses)))


def user_path_cost(path, cost_model):
    """Budget of the recorded path in its executed order.

    Direct pose-to-pose motion costs plus alpha per sample; no reordering
    credit.
    """
    total = cost_model.alpha * len(path)
    for a, b in zip(path.poses, path.poses[1:]):
        total += edge_cost(a, b, cost_model.beta)
    return float(total)


def evaluate(path, mesh, points, cam, model, graph, cost_model,
             spacing=None, d_link=None, kappa=DEFAULT_KAPPA,
             quality_bias=None):
    """Score a recorded path against a budget-matched automated solution."""
    if spacing is None:
        spacing = model.d_opt / 4.0
    if d_link is None:
        d_link = 1.5 * model.d_opt

    resampled = resample_path(path, spacing, rot_scale=model.d_opt)

    acc = AccumulatedQuality.zeros(len(points))
    for pose in resampled.poses:
        acc.accumulate(points, pose, mesh, cam, model)
    user_f = acc.total
    user_cost = user_path_cost(resampled, cost_model)

    aug_graph, user_indices = augment_graph(graph, resampled, d_link)

    # extend the quality matrix with columns for the recorded poses
    from .quality import quality_matrix
    qm = quality_matrix(points, aug_graph.poses, mesh, cam, model,
                        bias=quality_bias)

    problem = PlanningProblem(graph=aug_graph, qm=qm, cost_model=cost_model,
                              budget=user_cost)
    base = gcb(problem)
    improved = gcb_plus(problem, base)
    gcb_f = base.f_value
    gcb_plus_f = improved.f_value

    if gcb_plus_f > 0:
        qr = user_f / gcb_plus_f
    else:
        qr = 0.0 if user_f == 0 else float("inf")
    if gcb_f > 0:
        om_user = opt_metric(user_f, gcb_f, kappa)
        om_auto = opt_metric(gcb_plus_f, gcb_f, kappa)
    else:
        om_user = om_auto = 0.0

    return EvaluationReport(
        user_f=user_f,
        user_cost=user_cost,
        gcb_f=gcb_f,
        gcb_plus_f=gcb_plus_f,
        quality_ratio=qr,
        opt_metric_user=om_user,
        opt_metric_auto=om_auto,
        per_point_quality=acc.values,
        auto_order=improved.order,
        auto_positions=[aug_graph.poses[i].position.tolist()
                        for i in improved.order],
        user_beats_auto=qr > 1.0,
    )
