import numpy as np
import pytest

from sketchmesh.mesh import mesh_from_triangles
from sketchmesh.metrics import (
    chamfer_distance,
    chamfer_points,
    connected_components,
    mesh_stats,
    nonmanifold_edge_fraction,
    sample_surface,
    self_intersections,
)
from sketchmesh.synthetic import random_mesh, strip_mesh


def facing_quad(depth_bin, lo=30, hi=100, bins=128):
    a, b = (lo, depth_bin, lo), (hi, depth_bin, lo)
    c, d = (lo, depth_bin, hi), (hi, depth_bin, hi)
    return mesh_from_triangles([(a, b, c), (b, d, c)], bins)


def test_chamfer_points_identity_is_zero(rng):
    pts = rng.random((200, 3))
    assert chamfer_points(pts, pts) == 0.0


def test_chamfer_identical_meshes_near_zero(rng):
    # fresh samples per side, so identity is small, not exact
    mesh = random_mesh(rng, 40)
    assert chamfer_distance(mesh, mesh) < 1e-3


def test_chamfer_of_parallel_planes_is_squared_gap():
    near, far = facing_quad(40), facing_quad(50)
    gap = 10 / 127
    got = chamfer_distance(near, far, samples=2000)
    # point-to-point NN can only overshoot the true surface gap
    assert got >= gap * gap
    assert got == pytest.approx(gap * gap, rel=0.15)


def test_chamfer_points_is_symmetric(rng):
    a, b = rng.random((300, 3)), rng.random((250, 3))
    assert chamfer_points(a, b) == chamfer_points(b, a)


def test_chamfer_seed_reproducible(rng):
    a, b = random_mesh(rng, 30), random_mesh(rng, 30)
    assert chamfer_distance(a, b, seed=9) == chamfer_distance(a, b, seed=9)


def test_sample_surface_stays_on_plane(rng):
    quad = facing_quad(64)
    pts = sample_surface(quad, 500, rng)
    assert pts.shape == (500, 3)
    assert np.allclose(pts[:, 1], 64 / 127)
    assert pts[:, 0].min() >= 30 / 127 - 1e-9
    assert pts[:, 0].max() <= 100 / 127 + 1e-9


def test_connected_components():
    one = strip_mesh(6)
    assert connected_components(one) == 1
    two = one | facing_quad(90)
    assert connected_components(two) == 2
    empty = mesh_from_triangles([], 128)
    assert connected_components(empty) == 0


def test_nonmanifold_fraction_zero_on_strip():
    assert nonmanifold_edge_fraction(strip_mesh(8)) == 0.0


def test_nonmanifold_fan_detected():
    # three triangles share the edge (a, b)
    a, b = (0, 0, 0), (0, 0, 5)
    wings = [(5, 0, 2), (0, 5, 2), (5, 5, 2)]
    mesh = mesh_from_triangles([(a, b, w) for w in wings], 128)
    # 7 distinct edges, one of them shared by all three wings
    frac = nonmanifold_edge_fraction(mesh)
    assert frac == pytest.approx(1 / 7)


def test_self_intersections_clean_and_crossing():
    assert self_intersections(strip_mesh(8)) == 0
    # two triangles punching through each other
    t1 = ((10, 10, 10), (90, 10, 10), (50, 90, 10))
    t2 = ((50, 40, 0), (50, 40, 90), (50, 120, 40))
    crossing = mesh_from_triangles([t1, t2], 128)
    assert self_intersections(crossing) >= 1


def test_shared_vertex_is_not_an_intersection():
    t1 = ((0, 0, 0), (10, 0, 0), (0, 10, 0))
    t2 = ((0, 0, 0), (0, 0, 10), (10, 0, 10))
    mesh = mesh_from_triangles([t1, t2], 128)
    assert self_intersections(mesh) == 0


def test_mesh_stats_fields(rng):
    mesh = random_mesh(rng, 25)
    stats = mesh_stats(mesh)
    assert stats["faces"] == mesh.face_count
    assert stats["vertices"] == len(mesh.vertex_set())
    assert stats["components"] == connected_components(mesh)
    assert 0.0 <= stats["nonmanifold_edge_fraction"] <= 1.0
    assert stats["self_intersections"] >= 0
