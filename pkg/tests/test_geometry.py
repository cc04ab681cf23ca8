import numpy as np
import pytest

from inspectplan.geometry import (MeshFormatError, MeshValidationError,
                                  compute_vertex_normals, load_mesh,
                                  mesh_from_arrays, surface_points,
                                  write_ply_with_quality)

CUBE_OBJ = """\
v -0.5 -0.5 -0.5
v  0.5 -0.5 -0.5
v  0.5  0.5 -0.5
v -0.5  0.5 -0.5
v -0.5 -0.5  0.5
v  0.5 -0.5  0.5
v  0.5  0.5  0.5
v -0.5  0.5  0.5
f 1 2 3
f 1 3 4
f 5 7 6
f 5 8 7
f 1 5 6
f 1 6 2
f 2 6 7
f 2 7 3
f 3 7 8
f 3 8 4
f 4 8 5
f 4 5 1
"""


def test_load_cube_obj(tmp_path):
    p = tmp_path / "cube.obj"
    p.write_text(CUBE_OBJ)
    mesh = load_mesh(p)
    assert mesh.n_vertices == 8
    assert mesh.n_triangles == 12
    np.testing.assert_allclose(np.linalg.norm(mesh.normals, axis=1), 1.0,
                               atol=1e-9)


def test_single_right_triangle_planar_normals(tmp_path):
    p = tmp_path / "tri.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
    mesh = load_mesh(p)
    np.testing.assert_allclose(mesh.normals, [[0, 0, 1]] * 3, atol=1e-12)


def test_out_of_range_index_rejected(tmp_path):
    p = tmp_path / "bad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n")
    with pytest.raises(MeshValidationError):
        load_mesh(p)


def test_parse_error_reports_line(tmp_path):
    p = tmp_path / "broken.obj"
    p.write_text("v 0 0 0\nv oops 0 0\n")
    with pytest.raises(MeshFormatError) as exc:
        load_mesh(p)
    assert exc.value.line == 2


def test_empty_mesh_rejected(tmp_path):
    p = tmp_path / "empty.obj"
    p.write_text("# nothing here\n")
    with pytest.raises(MeshValidationError):
        load_mesh(p)


def test_icosphere_normals_match_analytic():
    from conftest import make_icosphere
    pts = surface_points(make_icosphere(subdivisions=1))  # 42 vertices
    radial = pts.positions / np.linalg.norm(pts.positions, axis=1)[:, None]
    angles = np.arccos(np.clip(np.einsum("ij,ij->i", pts.normals, radial),
                               -1, 1))
    assert np.all(angles < 1e-3)


def test_surface_points_one_per_vertex(icosphere):
    pts = surface_points(icosphere)
    assert len(pts) == icosphere.n_vertices
    np.testing.assert_array_equal(pts.positions, icosphere.vertices)


def test_zero_area_face_does_not_break_normals():
    verts = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (2, 0, 0)]
    tris = [(0, 1, 2), (0, 1, 3)]  # second triangle is collinear
    normals = compute_vertex_normals(verts, tris)
    np.testing.assert_allclose(np.linalg.norm(normals, axis=1), 1.0,
                               atol=1e-9)


def test_normal_recomputation_idempotent(icosphere):
    once = compute_vertex_normals(icosphere.vertices, icosphere.triangles)
    twice = compute_vertex_normals(icosphere.vertices, icosphere.triangles)
    np.testing.assert_array_equal(once, twice)


def test_ply_quality_round_trip(tmp_path, icosphere):
    q = np.linspace(0, 1, icosphere.n_vertices)
    p = tmp_path / "out.ply"
    write_ply_with_quality(p, icosphere, q)
    back = load_mesh(p)
    assert back.n_vertices == icosphere.n_vertices
    assert back.n_triangles == icosphere.n_triangles
    np.testing.assert_allclose(back.vertices, icosphere.vertices, atol=1e-4)


def test_quad_faces_are_fan_triangulated(tmp_path):
    p = tmp_path / "quad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    mesh = load_mesh(p)
    assert mesh.n_triangles == 2


def test_mesh_from_arrays_validates():
    with pytest.raises(MeshValidationError):
        mesh_from_arrays([(0, 0, 0)], [])
    with pytest.raises(MeshValidationError):
        mesh_from_arrays([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [(0, 1, 5)])
