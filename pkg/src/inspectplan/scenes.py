"""Procedural inspection objects and on-disk scene bundles.

Three watertight generators stand in for real CAD parts: a sloped panel, a
notched housing and a tubular frame with a through-hole.  A scene bundle is
a directory holding mesh.ply, scene.json (intrinsics, model and cost
parameters, optional kinematic chain) and graph.json.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import (TriangleMesh, load_mesh, mesh_from_arrays,
                       surface_points, write_ply_with_quality)
from .kinematics import KinematicChain, preset_chain
from .quality import QualityModel
from .viewgraph import (CostModel, ViewGraph, build_graph,
                        generate_candidates)
from .visibility import CameraIntrinsics

SCENE_OBJECTS = ("panel", "housing", "frame-like")


def make_panel(size=400.0, thickness=30.0, slope=0.35, res=10):
    """Watertight sloped plate: a slab whose top surface is tilted."""
    n = res + 1
    xs = np.linspace(-size / 2, size / 2, n)
    ys = np.linspace(-size / 2, size / 2, n)
    verts = []
    for y in ys:
        for x in xs:
            verts.append((x, y, thickness + slope * x))  # top
    for y in ys:
        for x in xs:
            verts.append((x, y, 0.0))                    # bottom
    tris = []

    def top(i, j):
        return i * n + j

    def bot(i, j):
        return n * n + i * n + j

    for i in range(res):
        for j in range(res):
            a, b, c, d = top(i, j), top(i, j + 1), top(i + 1, j + 1), top(i + 1, j)
            tris += [(a, b, c), (a, c, d)]
            a, b, c, d = bot(i, j), bot(i, j + 1), bot(i + 1, j + 1), bot(i + 1, j)
            tris += [(a, c, b), (a, d, c)]
    for j in range(res):  # y = min / max walls
        tris += [(top(0, j), bot(0, j), bot(0, j + 1)),
                 (top(0, j), bot(0, j + 1), top(0, j + 1))]
        tris += [(top(res, j), top(res, j + 1), bot(res, j + 1)),
                 (top(res, j), bot(res, j + 1), bot(res, j))]
    for i in range(res):  # x = min / max walls
        tris += [(top(i, 0), top(i + 1, 0), bot(i + 1, 0)),
                 (top(i, 0), bot(i + 1, 0), bot(i, 0))]
        tris += [(top(i, res), bot(i, res), bot(i + 1, res)),
                 (top(i, res), bot(i + 1, res), top(i + 1, res))]
    return mesh_from_arrays(verts, tris)


def make_housing(radius=180.0, height=260.0, notch_depth=55.0,
                 n_sides=36, n_levels=6, n_notches=4):
    """Watertight convex-ish extrusion with radial notches in its wall."""
    angles = np.linspace(0.0, 2 * math.pi, n_sides, endpoint=False)
    radii = np.full(n_sides, radius)
    for s in range(n_sides):
        phase = (angles[s] * n_notches) % (2 * math.pi)
        if phase < 0.9:
            radii[s] = radius - notch_depth
    ring = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    verts = []
    for lvl in range(n_levels + 1):
        z = height * lvl / n_levels
        for x, y in ring:
            verts.append((x, y, z))
    bottom_center = len(verts)
    verts.append((0.0, 0.0, 0.0))
    top_center = len(verts)
    verts.append((0.0, 0.0, height))

    def vid(lvl, s):
        return lvl * n_sides + s % n_sides

    tris = []
    for lvl in range(n_levels):
        for s in range(n_sides):
            a, b = vid(lvl, s), vid(lvl, s + 1)
            c, d = vid(lvl + 1, s + 1), vid(lvl + 1, s)
            tris += [(a, b, c), (a, c, d)]
    for s in range(n_sides):
        tris.append((bottom_center, vid(0, s + 1), vid(0, s)))
        tris.append((top_center, vid(n_levels, s), vid(n_levels, s + 1)))
    return mesh_from_arrays(verts, tris)


def make_frame(loop_radius=220.0, tube_radius=35.0, n_loop=36, n_tube=12,
               lobes=3, lobe_depth=0.25):
    """Watertight tube around a rounded-triangle loop; genus 1."""
    us = np.linspace(0.0, 2 * math.pi, n_loop, endpoint=False)
    verts = []
    for u in us:
        r = loop_radius * (1.0 + lobe_depth * math.cos(lobes * u))
        center = np.array([r * math.cos(u), r * math.sin(u), 0.0])
        # local frame of the tube cross-section
        tangent = np.array([-math.sin(u), math.cos(u), 0.0])
        radial = np.array([math.cos(u), math.sin(u), 0.0])
        vertical = np.array([0.0, 0.0, 1.0])
        for v in np.linspace(0.0, 2 * math.pi, n_tube, endpoint=False):
            offset = tube_radius * (math.cos(v) * radial + math.sin(v) * vertical)
            verts.append(center + offset)
    tris = []
    for i in range(n_loop):
        for j in range(n_tube):
            a = i * n_tube + j
            b = i * n_tube + (j + 1) % n_tube
            c = ((i + 1) % n_loop) * n_tube + (j + 1) % n_tube
            d = ((i + 1) % n_loop) * n_tube + j
            tris += [(a, b, c), (a, c, d)]
    return mesh_from_arrays(verts, tris)


def make_object(kind, **kwargs):
    if kind == "panel":
        return make_panel(**kwargs)
    if kind == "housing":
        return make_housing(**kwargs)
    if kind == "frame-like":
        return make_frame(**kwargs)
    raise ValueError(f"unknown object kind {kind!r}; "
                     f"choose from {SCENE_OBJECTS}")


def is_watertight(mesh):
    """Every undirected edge shared by exactly two triangles."""
    from collections import Counter
    edges = Counter()
    for a, b, c in mesh.triangles:
        for u, v in ((a, b), (b, c), (c, a)):
            edges[(min(u, v), max(u, v))] += 1
    return all(cnt == 2 for cnt in edges.values())


def euler_characteristic(mesh):
    edges = set()
    for a, b, c in mesh.triangles:
        for u, v in ((a, b), (b, c), (c, a)):
            edges.add((min(u, v), max(u, v)))
    return mesh.n_vertices - len(edges) + mesh.n_triangles


@dataclass
class Scene:
    """Everything a planning or interactive session needs, bundled."""

    name: str
    mesh: TriangleMesh
    points: object
    cam: CameraIntrinsics
    model: QualityModel
    graph: ViewGraph
    cost_model: CostModel
    chain: KinematicChain = None

    @classmethod
    def build(cls, name, mesh, cam=None, model=None, cost_model=None,
              chain=None, stride=4, k_nn=8, d_max=None):
        cam = cam or CameraIntrinsics()
        model = model or QualityModel()
        cost_model = cost_model or CostModel()
        points = surface_points(mesh)
        poses = generate_candidates(points, model, stride=stride)
        graph = build_graph(poses, beta=cost_model.beta, k_nn=k_nn,
                            d_max=d_max if d_max is not None
                            else 3.0 * model.d_opt)
        return cls(name=name, mesh=mesh, points=points, cam=cam, model=model,
                   graph=graph, cost_model=cost_model, chain=chain)

    def save(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        write_ply_with_quality(directory / "mesh.ply", self.mesh,
                               np.zeros(self.mesh.n_vertices))
        meta = {
            "schema": 1,
            "name": self.name,
            "intrinsics": self.cam.to_dict(),
            "quality_model": self.model.to_dict(),
            "cost_model": self.cost_model.to_dict(),
            "chain": None if self.chain is None else self.chain.to_dict(),
        }
        (directory / "scene.json").write_text(json.dumps(meta, indent=2))
        (directory / "graph.json").write_text(self.graph.to_json())

    @classmethod
    def load(cls, directory):
        directory = Path(directory)
        meta = json.loads((directory / "scene.json").read_text())
        mesh = load_mesh(directory / "mesh.ply")
        graph = ViewGraph.from_json((directory / "graph.json").read_text())
        chain = meta.get("chain")
        return cls(
            name=meta.get("name", directory.name),
            mesh=mesh,
            points=surface_points(mesh),
            cam=CameraIntrinsics.from_dict(meta["intrinsics"]),
            model=QualityModel.from_dict(meta["quality_model"]),
            graph=graph,
            cost_model=CostModel.from_dict(meta["cost_model"]),
            chain=None if chain is None else KinematicChain.from_dict(chain),
        )


# default candidate stride per object: coarse enough that consecutive
# candidates stay farther apart than the evaluation resampling spacing.
# The frame's stride is coprime with its tube ring count so consecutive
# candidates never share an orientation on adjacent rings.
SCENE_STRIDES = {"panel": 4, "housing": 4, "frame-like": 5}


def generate_scene(kind, name=None, chain_preset=None, stride=None,
                   **mesh_kwargs):
    """Build a full scene around one of the procedural objects."""
    mesh = make_object(kind, **mesh_kwargs)
    chain = preset_chain(chain_preset) if chain_preset else None
    if stride is None:
        stride = SCENE_STRIDES.get(kind, 4)
    return Scene.build(name=name or kind, mesh=mesh, chain=chain,
                       stride=stride, k_nn=16)
