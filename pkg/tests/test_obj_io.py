import numpy as np
import pytest

from sketchmesh.errors import ObjParseError
from sketchmesh.mesh import quantize
from sketchmesh.obj_io import dumps_obj, load_obj, loads_obj, save_obj
from sketchmesh.synthetic import random_mesh, random_real_mesh

TRI = """
v 0 0 0
v 1 0 0
v 0 1 0
f 1 2 3
"""


def test_loads_single_triangle():
    mesh = loads_obj(TRI)
    assert mesh.face_count == 1
    assert mesh.triangles.shape == (1, 3, 3)


def test_quad_faces_fan_triangulate():
    text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n"
    mesh = loads_obj(text)
    assert mesh.face_count == 2


def test_negative_indices_count_from_end():
    text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n"
    mesh = loads_obj(text)
    np.testing.assert_allclose(mesh.triangles[0][1], [1, 0, 0])


def test_slash_syntax_keeps_vertex_index():
    text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1 2/2/2 3//3\n"
    assert loads_obj(text).face_count == 1


def test_unknown_directives_ignored():
    text = "o thing\nvn 0 0 1\nusemtl m\n" + TRI
    assert loads_obj(text).face_count == 1


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ObjParseError) as err:
        loads_obj("v 0 0\n")
    assert err.value.line == 1

    with pytest.raises(ObjParseError) as err:
        loads_obj("v 0 0 0\nf 1 2 9\n")
    assert err.value.line == 2


def test_zero_index_rejected():
    with pytest.raises(ObjParseError):
        loads_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n")


def test_non_numeric_coordinate_rejected():
    with pytest.raises(ObjParseError):
        loads_obj("v 0 zero 0\n")


def test_dumps_loads_round_trip(rng):
    mesh = random_real_mesh(rng, 50)
    again = loads_obj(dumps_obj(mesh))
    assert again.face_count == mesh.face_count
    # triangle soup order is preserved by the writer
    np.testing.assert_allclose(again.triangles, mesh.triangles)


def test_save_load_round_trip(tmp_path, rng):
    mesh = random_real_mesh(rng, 30)
    path = tmp_path / "m.obj"
    save_obj(mesh, path)
    again = load_obj(path)
    np.testing.assert_allclose(again.triangles, mesh.triangles)


def test_quantized_round_trip_through_obj(rng):
    """Serialising a quantized mesh and re-quantizing is lossless."""
    mesh = random_mesh(rng, 60)
    text = dumps_obj(mesh)
    again = quantize(loads_obj(text), mesh.bins)
    assert again == mesh


def test_equal_meshes_serialize_identically(rng):
    mesh = random_mesh(rng, 40)
    assert dumps_obj(mesh) == dumps_obj(mesh)


def test_shared_vertices_written_once():
    text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3\nf 2 4 3\n"
    out = dumps_obj(loads_obj(text))
    assert out.count("\nv ") + out.startswith("v ") == 4
