"""Candidate view poses and the weighted workspace graph.

Edges mix translational and rotational motion cost; the metric closure
(all-pairs shortest paths over the edges) is what path costs are charged
against.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, shortest_path

from .transforms import look_rotation, matrix_to_quat, quat_angle
from .visibility import ViewPose

DEFAULT_BETA = 0.01
DEFAULT_KNN = 8


class GraphValidationError(ValueError):
    pass


class InfeasiblePathError(ValueError):
    """A path step crosses between disconnected graph components."""


@dataclass(frozen=True)
class CostModel:
    """Budget model: travel cost plus a fixed cost per measurement."""

    alpha: float = 0.0
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not (0.0 <= self.beta <= 1.0):
            raise ValueError("beta must be in [0, 1]")

    def to_dict(self):
        return {"alpha": self.alpha, "beta": self.beta}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def edge_cost(a, b, beta=DEFAULT_BETA):
    """Mixed translation/rotation motion cost between two poses.

    (1 - beta) * euclidean distance + beta * axis-angle rotation angle.
    Symmetric, zero on identical poses, insensitive to quaternion sign.
    """
    ct = float(np.linalg.norm(a.position - b.position))
    co = quat_angle(a.quaternion, b.quaternion)
    return (1.0 - beta) * ct + beta * co


def generate_candidates(points, model, stride=1):
    """Candidate poses offset from every stride-th surface point.

    Each pose sits at d_opt along the point's normal, looking back at the
    point, with a deterministic up vector (+Z projected out of the view
    axis, falling back to +X).
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    poses = []
    for i in range(0, len(points), stride):
        p = points.positions[i]
        n = points.normals[i]
        position = p + model.d_opt * n
        R = look_rotation(-n)
        poses.append(ViewPose(position=position, quaternion=matrix_to_quat(R)))
    return poses


@dataclass
class ViewGraph:
    """Discrete pose set with weighted edges and the metric closure."""

    poses: list
    edges: list  # (i, j, cost) with i < j
    beta: float = DEFAULT_BETA
    metric_closure: np.ndarray = None  # (k, k), inf across components
    component: np.ndarray = None       # component label per pose

    @property
    def k(self):
        return len(self.poses)

    def positions(self):
        return np.array([p.position for p in self.poses])

    def connected(self, i, j):
        return self.component[i] == self.component[j]

    def isolated_poses(self):
        labels, counts = np.unique(self.component, return_counts=True)
        small = set(labels[counts == 1])
        return [i for i, c in enumerate(self.component) if c in small]

    def to_json(self):
        return json.dumps({
            "poses": [p.to_dict() for p in self.poses],
            "edges": [[int(i), int(j), float(c)] for i, j, c in self.edges],
            "beta": self.beta,
        })

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        poses = [ViewPose.from_dict(p) for p in d["poses"]]
        edges = [(int(i), int(j), float(c)) for i, j, c in d["edges"]]
        return graph_from_edges(poses, edges, d.get("beta", DEFAULT_BETA))


def _closure(k, edges):
    rows = [e[0] for e in edges] + [e[1] for e in edges]
    cols = [e[1] for e in edges] + [e[0] for e in edges]
    data = [e[2] for e in edges] * 2
    adj = sp.csr_matrix((data, (rows, cols)), shape=(k, k))
    closure = shortest_path(adj, method="D", directed=False)
    _, component = connected_components(adj, directed=False)
    np.fill_diagonal(closure, 0.0)
    return closure, component


def graph_from_edges(poses, edges, beta=DEFAULT_BETA):
    """Assemble a ViewGraph from an explicit edge list."""
    g = ViewGraph(poses=list(poses), edges=list(edges), beta=beta)
    g.metric_closure, g.component = _closure(g.k, g.edges)
    return g


def build_graph(poses, beta=DEFAULT_BETA, k_nn=DEFAULT_KNN, d_max=None):
    """Connect poses to their nearest neighbors by position.

    Edges are kept only when the positional distance is <= d_max; weights
    come from edge_cost.  The metric closure spans connected components
    with inf between them.
    """
    if k_nn < 1:
        raise ValueError("k_nn must be >= 1")
    if len(poses) < 2:
        raise GraphValidationError("need at least 2 poses to build a graph")
    pos = np.array([p.position for p in poses])
    k = len(poses)
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
    np.fill_diagonal(dist, np.inf)
    edge_set = set()
    for i in range(k):
        order = np.argsort(dist[i], kind="stable")[:k_nn]
        for j in order:
            if d_max is not None and dist[i, j] > d_max:
                continue
            edge_set.add((min(i, int(j)), max(i, int(j))))
    edges = [(i, j, edge_cost(poses[i], poses[j], beta))
             for i, j in sorted(edge_set)]
    return graph_from_edges(poses, edges, beta)


def path_cost(graph, order, cost_model):
    """Budget of an ordered pose sequence through the metric closure.

    Sum of closure distances between consecutive poses plus alpha per
    measurement.  A single pose walks nowhere and costs alpha.
    """
    order = list(order)
    total = cost_model.alpha * len(order)
    for a, b in zip(order, order[1:]):
        d = graph.metric_closure[a, b]
        if not np.isfinite(d):
            raise InfeasiblePathError(f"poses {a} and {b} are disconnected")
        total += d
    return float(total)
