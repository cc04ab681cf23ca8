import math

import numpy as np
import pytest

from inspectplan.geometry import mesh_from_arrays, surface_points
from inspectplan.quality import QualityModel
from inspectplan.scenes import generate_scene
from inspectplan.transforms import look_rotation, matrix_to_quat
from inspectplan.viewgraph import CostModel
from inspectplan.visibility import CameraIntrinsics, ViewPose


def make_icosphere(subdivisions=2, radius=100.0, center=(0.0, 0.0, 0.0)):
    """Icosahedron subdivision sphere; 42 vertices at subdivisions=1."""
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
             (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
             (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    for _ in range(subdivisions):
        cache = {}
        new_faces = []

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc),
                          (ab, bc, ca)]
        faces = new_faces
    center = np.asarray(center, dtype=float)
    return mesh_from_arrays([center + radius * v for v in verts], faces)


def make_wall(z_plane, half=1000.0, axis=2):
    """Two-triangle square wall; `axis` is the constant coordinate."""
    corners2d = [(-half, -half), (half, -half), (half, half), (-half, half)]
    verts = []
    for a, b in corners2d:
        v = [0.0, 0.0, 0.0]
        v[axis] = z_plane
        v[(axis + 1) % 3] = a
        v[(axis + 2) % 3] = b
        verts.append(v)
    return mesh_from_arrays(verts, [(0, 1, 2), (0, 2, 3)])


def pose_looking(position, at, up=(0.0, 0.0, 1.0)):
    forward = np.asarray(at, float) - np.asarray(position, float)
    R = look_rotation(forward, up)
    return ViewPose(position=position, quaternion=matrix_to_quat(R))


@pytest.fixture(scope="session")
def cam():
    return CameraIntrinsics()


@pytest.fixture(scope="session")
def model():
    return QualityModel()


@pytest.fixture(scope="session")
def cost_model():
    return CostModel()


@pytest.fixture(scope="session")
def icosphere():
    return make_icosphere()


@pytest.fixture(scope="session")
def sphere_points(icosphere):
    return surface_points(icosphere)


@pytest.fixture(scope="session")
def panel_scene():
    return generate_scene("panel")
