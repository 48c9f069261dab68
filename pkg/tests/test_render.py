import numpy as np
import pytest

from sketchmesh.errors import EmptyMeshError
from sketchmesh.mesh import mesh_from_triangles, prune
from sketchmesh.render import (
    CameraPose,
    camera_basis,
    coverage_fraction,
    part_pixels,
    project_points,
    rasterize,
    sample_camera,
    visibility_mask,
)
from sketchmesh.synthetic import random_mesh


def facing_camera(size=64):
    # default pose looks at the cube center from azimuth 30, elevation 30
    return CameraPose(size=size)


def facing_quad(lo=40, hi=90, depth_bin=64, bins=128):
    """Two triangles spanning a square at constant y, facing the camera."""
    a, b = (lo, depth_bin, lo), (hi, depth_bin, lo)
    c, d = (lo, depth_bin, hi), (hi, depth_bin, hi)
    return mesh_from_triangles([(a, b, c), (b, d, c)], bins)


def test_camera_basis_is_orthonormal():
    for az, el in [(0, 0), (30, 30), (-90, 60), (45, 59)]:
        cam = CameraPose(azimuth=az, elevation=el)
        eye, right, up, forward = camera_basis(cam)
        for v in (right, up, forward):
            assert np.linalg.norm(v) == pytest.approx(1.0)
        assert abs(right @ up) < 1e-12
        assert abs(right @ forward) < 1e-12
        assert abs(up @ forward) < 1e-12


def test_camera_orbits_at_fixed_distance():
    center = np.array([0.5, 0.5, 0.5])
    for az, el in [(0, 0), (80, 10), (-45, 45)]:
        cam = CameraPose(azimuth=az, elevation=el)
        eye, *_ = camera_basis(cam)
        assert np.linalg.norm(eye - center) == pytest.approx(cam.distance)


def test_center_projects_to_image_center():
    cam = facing_camera(size=100)
    pixels, depth = project_points(cam, np.array([[0.5, 0.5, 0.5]]))
    assert pixels[0] == pytest.approx([50.0, 50.0])
    assert depth[0] == pytest.approx(cam.distance)


def test_point_behind_eye_is_dropped():
    cam = CameraPose(azimuth=0.0, elevation=0.0)
    eye, _, _, forward = camera_basis(cam)
    behind = eye - forward
    pixels, depth = project_points(cam, behind[None, :])
    assert np.isinf(depth[0])
    assert np.isnan(pixels[0]).all()


def test_sample_camera_ranges(rng):
    for _ in range(200):
        cam = sample_camera(rng)
        assert -90.0 <= cam.azimuth <= 90.0
        assert 0.0 <= cam.elevation <= 60.0


def test_rasterize_covers_expected_region():
    cam = CameraPose(azimuth=0.0, elevation=0.0, size=64)
    mesh = facing_quad()
    buf = rasterize(mesh, cam)
    cov = buf.coverage
    assert cov.any()
    rows, cols = np.where(cov)
    # the quad is centered in x, entirely in the upper (high z) image half
    assert cols.min() < 32 < cols.max()
    assert rows.max() < 40


def test_face_index_matches_ordered():
    cam = CameraPose(azimuth=0.0, elevation=0.0, size=64)
    mesh = facing_quad()
    buf = rasterize(mesh, cam)
    seen = set(np.unique(buf.face_index)) - {-1}
    assert seen == {0, 1}


def test_nearer_surface_wins():
    cam = CameraPose(azimuth=0.0, elevation=0.0, size=64)
    near = facing_quad(depth_bin=40)  # closer to the camera at -y
    far = facing_quad(depth_bin=90)
    scene = near | far
    buf = rasterize(scene, cam)
    owners = part_pixels(near, scene, buf)
    # everywhere the scene is visible, the near quad owns the pixel
    assert np.array_equal(owners, buf.coverage)


def test_normals_face_the_camera():
    cam = CameraPose(azimuth=0.0, elevation=0.0, size=64)
    buf = rasterize(facing_quad(), cam)
    _, _, _, forward = camera_basis(cam)
    covered = buf.coverage
    dots = buf.normal[covered] @ forward
    assert (dots < 0).all()


def test_normals_unit_length_where_covered():
    cam = facing_camera()
    buf = rasterize(facing_quad(), cam)
    norms = np.linalg.norm(buf.normal[buf.coverage], axis=-1)
    assert np.allclose(norms, 1.0)


def test_background_pixels_are_marked():
    cam = facing_camera()
    buf = rasterize(facing_quad(), cam)
    bg = ~buf.coverage
    assert np.isinf(buf.depth[bg]).all()
    assert (buf.face_index[bg] == -1).all()
    assert np.allclose(buf.normal[bg], 0.0)


def test_coverage_fraction_bounds(rng):
    mesh = random_mesh(rng, 80)
    cam = facing_camera()
    assert coverage_fraction(mesh, mesh, cam) == pytest.approx(1.0)
    sel = set(list(mesh.vertex_set())[::2])
    removed, kept = prune(mesh, sel)
    if kept.face_count:
        assert 0.0 <= coverage_fraction(kept, mesh, cam) <= 1.0


def test_coverage_fraction_raises_off_screen():
    cam = facing_camera()
    empty = mesh_from_triangles([], 128)
    with pytest.raises(EmptyMeshError):
        coverage_fraction(empty, empty, cam)


def test_visibility_masks_partition_coverage(rng):
    mesh = random_mesh(rng, 60)
    cam = facing_camera(size=96)
    sel = set(list(mesh.vertex_set())[::3])
    removed, kept = prune(mesh, sel)
    buf = rasterize(mesh, cam)
    m_removed = part_pixels(removed, mesh, buf)
    m_kept = part_pixels(kept, mesh, buf)
    assert not (m_removed & m_kept).any()
    assert np.array_equal(m_removed | m_kept, buf.coverage)
    assert np.array_equal(m_removed, visibility_mask(removed, mesh, cam))


def test_camera_json_round_trip():
    cam = CameraPose(azimuth=-12.5, elevation=41.0, size=256)
    assert CameraPose.from_json(cam.to_json()) == cam
