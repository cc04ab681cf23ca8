"""Measurement quality models, the quality matrix and the set objective.

A quality model scores a single measurement of a surface point from a view
pose by distance and incidence angle.  The matrix collects these scores for
every point/pose pair with occlusion zeros; the objective sums, over points,
the best score achieved by any selected pose.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .visibility import render_depth, visible_points

ANGLE_DISTANCE = "angle-distance"
PERCEIVED_AREA = "perceived-area"
INTENSITY = "intensity"


@dataclass(frozen=True)
class QualityModel:
    """Per-measurement quality as a function of distance and angle.

    Kinds:
      angle-distance: cos(theta) * exp(-(d - d_opt)^2 / sigma^2)
      perceived-area: cos(theta) * (d_ref / d)^2, clamped to [0, 1]
      intensity:      cos(theta)
    All kinds clamp to 0 for grazing or back-facing angles (theta >= pi/2).
    """

    kind: str = ANGLE_DISTANCE
    d_opt: float = 200.0
    sigma: float = 100.0
    d_ref: float = None  # perceived-area reference distance; defaults to d_opt

    def __post_init__(self):
        if self.kind not in (ANGLE_DISTANCE, PERCEIVED_AREA, INTENSITY):
            raise ValueError(f"unknown quality model kind {self.kind!r}")
        if self.d_opt <= 0 or self.sigma <= 0:
            raise ValueError("d_opt and sigma must be positive")
        if self.d_ref is None:
            object.__setattr__(self, "d_ref", self.d_opt)

    def to_dict(self):
        return {"kind": self.kind, "d_opt": self.d_opt,
                "sigma": self.sigma, "d_ref": self.d_ref}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def eval_Q(model, d, theta):
    """Quality of one measurement at distance d (mm) and incidence theta (rad).

    Vectorized over d/theta.  Output clamped to [0, 1]; zero at and beyond
    grazing incidence.
    """
    d = np.asarray(d, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(theta))):
        raise ValueError("non-finite distance or angle")
    cos_t = np.where(theta < 0.5 * math.pi, np.cos(theta), 0.0)
    if model.kind == ANGLE_DISTANCE:
        q = cos_t * np.exp(-((d - model.d_opt) ** 2) / model.sigma**2)
    elif model.kind == PERCEIVED_AREA:
        q = cos_t * (model.d_ref / d) ** 2
    else:
        q = cos_t
    q = np.clip(q, 0.0, 1.0)
    return float(q) if q.ndim == 0 else q


def point_qualities(points, pose, model, mask=None):
    """Per-point quality at one pose; zero where `mask` is False."""
    delta = pose.position - points.positions
    d = np.linalg.norm(delta, axis=1)
    d = np.maximum(d, 1e-9)
    cos_t = np.einsum("ij,ij->i", points.normals, delta) / d
    theta = np.arccos(np.clip(cos_t, -1.0, 1.0))
    q = eval_Q(model, d, theta)
    if mask is not None:
        q = np.where(mask, q, 0.0)
    return q


@dataclass
class QualityMatrix:
    """Sparse n x k matrix of per point/pose qualities, zeros when occluded.

    Columns are stored as (row indices, values) pairs; only nonzeros kept.
    """

    n: int
    k: int
    columns: list = field(default_factory=list)  # k pairs (indices, values)

    @classmethod
    def from_dense(cls, dense):
        dense = np.asarray(dense, dtype=np.float64)
        n, k = dense.shape
        cols = []
        for j in range(k):
            idx = np.nonzero(dense[:, j])[0]
            cols.append((idx, dense[idx, j].copy()))
        return cls(n=n, k=k, columns=cols)

    def column_dense(self, j):
        out = np.zeros(self.n)
        idx, vals = self.columns[j]
        out[idx] = vals
        return out

    def column_sum(self, j):
        return float(self.columns[j][1].sum())

    def to_dense(self):
        out = np.zeros((self.n, self.k))
        for j in range(self.k):
            idx, vals = self.columns[j]
            out[idx, j] = vals
        return out

    def append_column(self, qualities):
        qualities = np.asarray(qualities, dtype=np.float64)
        idx = np.nonzero(qualities)[0]
        self.columns.append((idx, qualities[idx].copy()))
        self.k += 1

    def to_json(self):
        entries = []
        for j in range(self.k):
            idx, vals = self.columns[j]
            entries.extend([[int(i), j, float(q)] for i, q in zip(idx, vals)])
        return json.dumps({"n": self.n, "k": self.k, "entries": entries})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        dense = np.zeros((d["n"], d["k"]))
        for i, j, q in d["entries"]:
            dense[i, j] = q
        return cls.from_dense(dense)


def quality_matrix(points, poses, mesh, cam, model, bias=None):
    """Quality of every surface point from every candidate pose.

    Visibility comes from a fresh depth-buffer render per pose; occluded or
    out-of-frustum points score zero.
    """
    qm = QualityMatrix(n=len(points), k=0)
    for pose in poses:
        depth = render_depth(mesh, pose, cam)
        if bias is None:
            mask = visible_points(points, pose, cam, depth)
        else:
            mask = visible_points(points, pose, cam, depth, bias=bias)
        qm.append_column(point_qualities(points, pose, model, mask))
    return qm


def objective_f(qm, X):
    """Total inspection quality of a pose subset: sum of per-point maxima."""
    X = list(X)
    if not X:
        return 0.0
    best = np.zeros(qm.n)
    for j in X:
        if not (0 <= j < qm.k):
            raise IndexError(f"pose index {j} out of range for k={qm.k}")
        idx, vals = qm.columns[j]
        np.maximum.at(best, idx, vals)
    return float(best.sum())


@dataclass
class AccumulatedQuality:
    """Per-point running best quality over an interactive session."""

    values: np.ndarray
    last_pose: object = None

    @classmethod
    def zeros(cls, n):
        return cls(values=np.zeros(n))

    @property
    def total(self):
        return float(self.values.sum())

    def accumulate(self, points, pose, mesh, cam, model):
        """Fold in one pose; returns indices whose value increased.

        The per-point value is the running max, so repeating a pose is a
        no-op and ordering does not matter.
        """
        depth = render_depth(mesh, pose, cam)
        mask = visible_points(points, pose, cam, depth)
        q = point_qualities(points, pose, model, mask)
        changed = np.nonzero(q > self.values)[0]
        self.values[changed] = q[changed]
        self.last_pose = pose
        return changed
