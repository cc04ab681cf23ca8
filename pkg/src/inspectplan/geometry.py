"""Mesh ingestion and surface point extraction.

Meshes are triangle soups in millimetres.  ASCII OBJ (v/f records) and
ASCII PLY are supported.  Per-vertex normals are recomputed on load as
area-weighted averages of incident face normals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class MeshFormatError(ValueError):
    """Raised when a mesh file cannot be parsed; carries the line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MeshValidationError(ValueError):
    """Raised when parsed geometry violates mesh invariants."""


@dataclass(frozen=True)
class TriangleMesh:
    """Triangle mesh with per-vertex unit normals.

    vertices: (n, 3) float64, millimetres
    triangles: (t, 3) int vertex indices
    normals: (n, 3) float64 unit vectors
    """

    vertices: np.ndarray
    triangles: np.ndarray
    normals: np.ndarray

    def __post_init__(self):
        if self.triangles.shape[0] < 1:
            raise MeshValidationError("mesh has no triangles")
        if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
            raise MeshValidationError("triangle index out of range")
        lens = np.linalg.norm(self.normals, axis=1)
        if not np.allclose(lens, 1.0, atol=1e-6):
            raise MeshValidationError("vertex normals are not unit length")

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)


@dataclass(frozen=True)
class SurfacePointSet:
    """The point set the objective is summed over: one point per mesh vertex."""

    positions: np.ndarray  # (n, 3) mm
    normals: np.ndarray    # (n, 3) unit
    source_indices: np.ndarray = field(default=None)  # indices into owning mesh

    def __post_init__(self):
        if len(self.positions) < 1:
            raise MeshValidationError("surface point set is empty")
        if self.source_indices is None:
            object.__setattr__(self, "source_indices", np.arange(len(self.positions)))

    def __len__(self):
        return len(self.positions)


def compute_vertex_normals(vertices, triangles):
    """Area-weighted average of incident face normals, normalized.

    Zero-area faces contribute nothing.  Vertices with no incident area get
    an arbitrary +Z normal so the unit-length invariant holds.
    """
    vertices = np.asarray(vertices, dtype=np.float64)
    triangles = np.asarray(triangles, dtype=np.int64)
    normals = np.zeros_like(vertices)
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    # cross product length is twice the face area, so this is area weighting
    face = np.cross(b - a, c - a)
    for k in range(3):
        np.add.at(normals, triangles[:, k], face)
    lens = np.linalg.norm(normals, axis=1)
    degenerate = lens < 1e-12
    normals[degenerate] = (0.0, 0.0, 1.0)
    lens[degenerate] = 1.0
    return normals / lens[:, None]


def _parse_obj(lines):
    vertices = []
    faces = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "v":
            if len(parts) < 4:
                raise MeshFormatError("vertex record needs 3 coordinates", lineno)
            try:
                vertices.append([float(p) for p in parts[1:4]])
            except ValueError:
                raise MeshFormatError("bad vertex coordinate", lineno)
        elif parts[0] == "f":
            if len(parts) < 4:
                raise MeshFormatError("face record needs at least 3 indices", lineno)
            try:
                idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
            except ValueError:
                raise MeshFormatError("bad face index", lineno)
            # fan-triangulate polygons
            for k in range(1, len(idx) - 1):
                faces.append([idx[0], idx[k], idx[k + 1]])
    return vertices, faces


def _parse_ply(lines):
    it = iter(enumerate(lines, start=1))
    lineno, line = next(it)
    if line.strip() != "ply":
        raise MeshFormatError("not a PLY file", lineno)
    n_vert = n_face = None
    vertex_props = []
    current_element = None
    fmt = None
    for lineno, raw in it:
        line = raw.strip()
        if not line or line.startswith("comment"):
            continue
        parts = line.split()
        if parts[0] == "format":
            fmt = parts[1]
            if fmt != "ascii":
                raise MeshFormatError("only ASCII PLY is supported", lineno)
        elif parts[0] == "element":
            current_element = parts[1]
            if parts[1] == "vertex":
                n_vert = int(parts[2])
            elif parts[1] == "face":
                n_face = int(parts[2])
        elif parts[0] == "property":
            if current_element == "vertex" and parts[1] != "list":
                vertex_props.append(parts[-1])
        elif parts[0] == "end_header":
            break
    if n_vert is None or n_face is None:
        raise MeshFormatError("PLY header missing vertex or face element", lineno)
    try:
        ix, iy, iz = (vertex_props.index(k) for k in ("x", "y", "z"))
    except ValueError:
        raise MeshFormatError("PLY vertex element lacks x/y/z", lineno)
    vertices = []
    faces = []
    for _ in range(n_vert):
        lineno, raw = next(it)
        parts = raw.split()
        try:
            vertices.append([float(parts[ix]), float(parts[iy]), float(parts[iz])])
        except (ValueError, IndexError):
            raise MeshFormatError("bad vertex record", lineno)
        if len(vertices[-1]) != 3:
            raise MeshFormatError("bad vertex record", lineno)
    for _ in range(n_face):
        lineno, raw = next(it)
        parts = raw.split()
        try:
            cnt = int(parts[0])
            idx = [int(p) for p in parts[1:1 + cnt]]
        except (ValueError, IndexError):
            raise MeshFormatError("bad face record", lineno)
        if len(idx) != cnt or cnt < 3:
            raise MeshFormatError("bad face record", lineno)
        for k in range(1, cnt - 1):
            faces.append([idx[0], idx[k], idx[k + 1]])
    return vertices, faces


def load_mesh(path):
    """Load an ASCII OBJ or PLY file and recompute per-vertex normals."""
    path = Path(path)
    text = path.read_text()
    lines = text.splitlines()
    if path.suffix.lower() == ".ply" or (lines and lines[0].strip() == "ply"):
        vertices, faces = _parse_ply(lines)
    else:
        vertices, faces = _parse_obj(lines)
    return mesh_from_arrays(vertices, faces)


def mesh_from_arrays(vertices, triangles):
    """Build a TriangleMesh from raw arrays, computing normals."""
    vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    if len(vertices) == 0 or len(triangles) == 0:
        raise MeshValidationError("empty mesh")
    if triangles.min() < 0 or triangles.max() >= len(vertices):
        raise MeshValidationError("triangle index out of range")
    normals = compute_vertex_normals(vertices, triangles)
    return TriangleMesh(vertices=vertices, triangles=triangles, normals=normals)


def surface_points(mesh):
    """One surface point per mesh vertex, carrying that vertex's normal."""
    return SurfacePointSet(
        positions=mesh.vertices.copy(),
        normals=mesh.normals.copy(),
        source_indices=np.arange(mesh.n_vertices),
    )


def write_ply_with_quality(path, mesh, quality):
    """Write an ASCII PLY with a float vertex property "quality"."""
    quality = np.asarray(quality, dtype=np.float64)
    if quality.shape != (mesh.n_vertices,):
        raise ValueError("quality vector length must match vertex count")
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {mesh.n_vertices}\n")
        fh.write("property float x\nproperty float y\nproperty float z\n")
        fh.write("property float quality\n")
        fh.write(f"element face {mesh.n_triangles}\n")
        fh.write("property list uchar int vertex_indices\n")
        fh.write("end_header\n")
        for v, q in zip(mesh.vertices, quality):
            fh.write(f"{v[0]:.6f} {v[1]:.6f} {v[2]:.6f} {q:.6f}\n")
        for t in mesh.triangles:
            fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")


def write_obj_polyline(path, polylines):
    """Write one or more 3D polylines as an OBJ line set.

    polylines: list of (name, (m, 3) array) pairs; OBJ `l` records connect
    consecutive points.
    """
    with open(path, "w") as fh:
        offset = 1
        for name, pts in polylines:
            pts = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
            fh.write(f"o {name}\n")
            for p in pts:
                fh.write(f"v {p[0]:.6f} {p[1]:.6f} {p[2]:.6f}\n")
            if len(pts) > 1:
                indices = " ".join(str(offset + i) for i in range(len(pts)))
                fh.write(f"l {indices}\n")
            offset += len(pts)
