"""Minimal software rasterizer: depth, face-id, and normal buffers.

A perspective pinhole camera orbits the unit-cube center with +z as
world up. Rasterisation is deterministic: triangles are walked in their
stored order, the depth test is strict less-than, so of two triangles at
the exact same depth the earlier one keeps the pixel. Depth varies
hyperbolically across a triangle (1/z interpolates linearly in screen
space), which is what makes the z-buffer correct under perspective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import EmptyMeshError
from .mesh import QuantizedMesh, RealMesh, dequantize

DEFAULT_IMAGE_SIZE = 512
_NEAR = 1e-6


@dataclass(frozen=True)
class CameraPose:
    """Orbit camera: angles in degrees, distance from the cube center."""

    azimuth: float = 30.0
    elevation: float = 30.0
    distance: float = 2.4
    fov_deg: float = 60.0
    size: int = DEFAULT_IMAGE_SIZE

    def to_json(self) -> dict:
        return {
            "azimuth": self.azimuth,
            "elevation": self.elevation,
            "distance": self.distance,
            "fov_deg": self.fov_deg,
            "size": self.size,
        }

    @staticmethod
    def from_json(doc: dict) -> "CameraPose":
        return CameraPose(
            azimuth=float(doc["azimuth"]),
            elevation=float(doc["elevation"]),
            distance=float(doc.get("distance", 2.4)),
            fov_deg=float(doc.get("fov_deg", 60.0)),
            size=int(doc.get("size", DEFAULT_IMAGE_SIZE)),
        )


def sample_camera(
    rng: np.random.Generator, size: int = DEFAULT_IMAGE_SIZE
) -> CameraPose:
    """Azimuth uniform in [-90, 90], elevation uniform in [0, 60]."""
    return CameraPose(
        azimuth=float(rng.uniform(-90.0, 90.0)),
        elevation=float(rng.uniform(0.0, 60.0)),
        size=size,
    )


def camera_basis(camera: CameraPose):
    """Return (eye, right, up, forward) in world space."""
    az = math.radians(camera.azimuth)
    el = math.radians(camera.elevation)
    center = np.array([0.5, 0.5, 0.5])
    offset = np.array(
        [
            math.sin(az) * math.cos(el),
            -math.cos(az) * math.cos(el),
            math.sin(el),
        ]
    )
    eye = center + camera.distance * offset
    forward = center - eye
    forward /= np.linalg.norm(forward)
    world_up = np.array([0.0, 0.0, 1.0])
    right = np.cross(forward, world_up)
    n = np.linalg.norm(right)
    if n < 1e-9:  # looking straight down the up axis
        right = np.cross(forward, np.array([0.0, 1.0, 0.0]))
        n = np.linalg.norm(right)
    right /= n
    up = np.cross(right, forward)
    return eye, right, up, forward


@dataclass
class RenderBuffers:
    """Per-pixel depth (camera z, inf = background), face index (-1 = none),
    and camera-facing unit normals (zero vector on background)."""

    depth: np.ndarray
    face_index: np.ndarray
    normal: np.ndarray

    @property
    def coverage(self) -> np.ndarray:
        return np.isfinite(self.depth)


def _camera_space(camera: CameraPose, points: np.ndarray):
    eye, right, up, forward = camera_basis(camera)
    rel = points - eye
    return rel @ right, rel @ up, rel @ forward


def project_points(camera: CameraPose, points: np.ndarray):
    """Project world points to pixel coordinates.

    Returns (pixels (N, 2) float [col, row], depth (N,)). Points at or
    behind the eye plane get inf depth and nan pixels.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    xc, yc, zc = _camera_space(camera, pts)
    t = math.tan(math.radians(camera.fov_deg) / 2.0)
    ok = zc > _NEAR
    with np.errstate(divide="ignore", invalid="ignore"):
        ndc_x = np.where(ok, xc / (zc * t), np.nan)
        ndc_y = np.where(ok, yc / (zc * t), np.nan)
    col = (ndc_x + 1.0) * 0.5 * camera.size
    row = (1.0 - (ndc_y + 1.0) * 0.5) * camera.size
    depth = np.where(ok, zc, np.inf)
    return np.stack([col, row], axis=-1), depth


def _mesh_triangle_array(mesh: Union[RealMesh, QuantizedMesh]) -> np.ndarray:
    if isinstance(mesh, QuantizedMesh):
        return dequantize(mesh).triangles
    return mesh.triangles


def rasterize(
    mesh: Union[RealMesh, QuantizedMesh], camera: CameraPose
) -> RenderBuffers:
    """Render to depth/face/normal buffers. Quantized meshes are drawn in
    canonical order, so face indices match ``mesh.ordered()``."""
    tris = _mesh_triangle_array(mesh)
    size = camera.size
    depth = np.full((size, size), np.inf)
    face = np.full((size, size), -1, dtype=np.int32)
    normal = np.zeros((size, size, 3))
    buffers = RenderBuffers(depth, face, normal)
    n_faces = tris.shape[0]
    if n_faces == 0:
        return buffers

    eye, right, up, forward = camera_basis(camera)
    flat = tris.reshape(-1, 3)
    rel = flat - eye
    xc = (rel @ right).reshape(n_faces, 3)
    yc = (rel @ up).reshape(n_faces, 3)
    zc = (rel @ forward).reshape(n_faces, 3)
    t = math.tan(math.radians(camera.fov_deg) / 2.0)

    # Per-face geometric normals, flipped toward the camera.
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    n = np.cross(e1, e2)
    lengths = np.linalg.norm(n, axis=1)
    good = lengths > 1e-12
    n[good] /= lengths[good, None]
    centroid = tris.mean(axis=1)
    to_eye = eye - centroid
    flip = (n * to_eye).sum(axis=1) < 0
    n[flip] = -n[flip]

    for i in range(n_faces):
        z = zc[i]
        if np.any(z <= _NEAR):
            continue  # clipping against the eye plane is not needed here
        px = (xc[i] / (z * t) + 1.0) * 0.5 * size
        py = (1.0 - (yc[i] / (z * t) + 1.0) * 0.5) * size
        c0 = max(0, int(math.ceil(px.min() - 0.5)))
        c1 = min(size - 1, int(math.floor(px.max() - 0.5)))
        r0 = max(0, int(math.ceil(py.min() - 0.5)))
        r1 = min(size - 1, int(math.floor(py.max() - 0.5)))
        if c1 < c0 or r1 < r0:
            continue
        ax, bx, cx = px
        ay, by, cy = py
        area = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if area == 0.0:
            continue
        X, Y = np.meshgrid(
            np.arange(c0, c1 + 1) + 0.5, np.arange(r0, r1 + 1) + 0.5
        )
        e0 = (cx - bx) * (Y - by) - (cy - by) * (X - bx)
        e1p = (ax - cx) * (Y - cy) - (ay - cy) * (X - cx)
        e2p = (bx - ax) * (Y - ay) - (by - ay) * (X - ax)
        inside = ((e0 >= 0) & (e1p >= 0) & (e2p >= 0)) | (
            (e0 <= 0) & (e1p <= 0) & (e2p <= 0)
        )
        if not inside.any():
            continue
        l0 = e0 / area
        l1 = e1p / area
        l2 = e2p / area
        inv_z = l0 / z[0] + l1 / z[1] + l2 / z[2]
        with np.errstate(divide="ignore"):
            d = 1.0 / inv_z
        window = depth[r0 : r1 + 1, c0 : c1 + 1]
        win = inside & (d < window)
        window[win] = d[win]
        face[r0 : r1 + 1, c0 : c1 + 1][win] = i
        normal[r0 : r1 + 1, c0 : c1 + 1][win] = n[i]
    return buffers


def coverage_fraction(
    part: QuantizedMesh, whole: QuantizedMesh, camera: CameraPose
) -> float:
    """Visible-pixel count of ``part`` rendered alone over that of ``whole``.

    Raises EmptyMeshError when the whole mesh covers no pixels.
    """
    whole_cov = rasterize(whole, camera).coverage
    total = int(whole_cov.sum())
    if total == 0:
        raise EmptyMeshError("reference mesh covers no pixels")
    part_cov = rasterize(part, camera).coverage
    return int(part_cov.sum()) / total


def part_pixels(
    part: QuantizedMesh,
    scene: QuantizedMesh,
    buffers: RenderBuffers,
) -> np.ndarray:
    """Pixels of an already-rendered scene owned by triangles of ``part``.

    ``buffers`` must come from rasterizing ``scene``; membership is by
    triangle identity, so ``part`` should be a subset of the scene.
    """
    order = scene.ordered()
    members = np.array(
        [t in part.triangles for t in order], dtype=bool
    )
    mask = np.zeros(buffers.face_index.shape, dtype=bool)
    idx = buffers.face_index
    valid = idx >= 0
    mask[valid] = members[idx[valid]]
    return mask


def visibility_mask(
    part: QuantizedMesh, scene: QuantizedMesh, camera: CameraPose
) -> np.ndarray:
    """Pixels where ``part`` is the visible surface of ``scene``."""
    return part_pixels(part, scene, rasterize(scene, camera))
