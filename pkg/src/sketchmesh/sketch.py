"""Sketch images: three-class stroke maps and their synthesis from renders.

A sketch is an (H, W) uint8 map with classes background / kept stroke /
edit stroke. The PNG form is exact-color RGB: white background, black
kept strokes, pure red edit strokes; loading requires those exact
values, so the format is a lossless contract with any client.

Synthesis runs edge detection over a render of the mesh (depth image
plus the three channels of the normal image, unioned) and labels as
"edit" the strokes that fall on the visible pixels of the edit region,
grown by one dilation step so boundary strokes land inside.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image
from scipy import ndimage

from .edges import canny, dilate
from .mesh import QuantizedMesh
from .render import CameraPose, RenderBuffers, part_pixels, rasterize

BACKGROUND = 0
KEPT = 1
EDIT = 2

_COLORS = {
    BACKGROUND: (255, 255, 255),
    KEPT: (0, 0, 0),
    EDIT: (255, 0, 0),
}

# Background level of the depth image fed to the edge detector; anything
# > 1 guarantees a silhouette step against the [0, 1] surface range.
_DEPTH_BACKGROUND = 1.25


@dataclass
class SketchImage:
    classes: np.ndarray  # (H, W) uint8 in {0, 1, 2}

    def __post_init__(self):
        arr = np.asarray(self.classes)
        if arr.ndim != 2:
            raise ValueError("sketch must be a 2-D class map")
        if arr.size and arr.max() > EDIT:
            raise ValueError("sketch classes must be 0, 1, or 2")
        self.classes = arr.astype(np.uint8)

    @property
    def size(self) -> tuple[int, int]:
        return self.classes.shape

    @property
    def strokes(self) -> np.ndarray:
        return self.classes != BACKGROUND

    @property
    def kept_mask(self) -> np.ndarray:
        return self.classes == KEPT

    @property
    def edit_mask(self) -> np.ndarray:
        return self.classes == EDIT

    def __eq__(self, other) -> bool:
        return isinstance(other, SketchImage) and np.array_equal(
            self.classes, other.classes
        )


def blank_sketch(size: int) -> SketchImage:
    return SketchImage(np.zeros((size, size), dtype=np.uint8))


def depth_image(buffers: RenderBuffers) -> np.ndarray:
    """Covered depths normalised to [0, 1], background at a fixed step."""
    depth = buffers.depth
    img = np.full(depth.shape, _DEPTH_BACKGROUND)
    cov = buffers.coverage
    if cov.any():
        d = depth[cov]
        lo, hi = float(d.min()), float(d.max())
        span = hi - lo
        img[cov] = (d - lo) / span if span > 0 else 0.0
    return img


def normal_image(buffers: RenderBuffers) -> np.ndarray:
    """Unit normals mapped to [0, 1] per channel; background sits at 0.5."""
    return (buffers.normal + 1.0) / 2.0


def stroke_mask(buffers: RenderBuffers, low: float = 0.1, high: float = 0.2) -> np.ndarray:
    """Union of edges found in the depth image and each normal channel."""
    strokes = canny(depth_image(buffers), low, high)
    normals = normal_image(buffers)
    for ch in range(3):
        strokes |= canny(normals[:, :, ch], low, high)
    return strokes


def synth_sketch(
    mesh: QuantizedMesh,
    removed: Optional[QuantizedMesh],
    camera: CameraPose,
) -> SketchImage:
    """Render ``mesh`` and partition its strokes into kept vs edit.

    ``removed`` (a subset of ``mesh``) marks the edit region; strokes on
    its visible pixels (dilated by one) become edit strokes. Pass None
    or an empty mesh for an all-kept sketch.
    """
    buffers = rasterize(mesh, camera)
    strokes = stroke_mask(buffers)
    classes = np.where(strokes, KEPT, BACKGROUND).astype(np.uint8)
    if removed is not None and removed.face_count:
        region = part_pixels(removed, mesh, buffers)
        classes[strokes & dilate(region, 1)] = EDIT
    return SketchImage(classes)


# --- PNG contract --------------------------------------------------------


def to_png_bytes(sketch: SketchImage) -> bytes:
    h, w = sketch.classes.shape
    rgb = np.empty((h, w, 3), dtype=np.uint8)
    for cls, color in _COLORS.items():
        rgb[sketch.classes == cls] = color
    img = Image.fromarray(rgb, mode="RGB")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def from_png_bytes(blob: bytes) -> SketchImage:
    img = Image.open(io.BytesIO(blob)).convert("RGB")
    rgb = np.asarray(img)
    classes = np.full(rgb.shape[:2], 255, dtype=np.uint8)
    for cls, color in _COLORS.items():
        classes[(rgb == color).all(axis=-1)] = cls
    if (classes == 255).any():
        bad = rgb[classes == 255][0]
        raise ValueError(f"pixel color {tuple(int(c) for c in bad)} is not a sketch class")
    return SketchImage(classes)


def save_png(sketch: SketchImage, path: Union[str, Path]) -> None:
    Path(path).write_bytes(to_png_bytes(sketch))


def load_png(path: Union[str, Path]) -> SketchImage:
    return from_png_bytes(Path(path).read_bytes())


# --- augmentation and diffs ---------------------------------------------


def augment_sketch(
    sketch: SketchImage,
    rng: np.random.Generator,
    max_rotate_deg: float = 5.0,
    max_scale: float = 0.03,
    max_translate: float = 0.05,
    max_elastic_px: float = 4.0,
) -> SketchImage:
    """Hand-drawn jitter: small affine warp plus smooth elastic offsets.

    The class map is resampled with nearest-neighbour lookup through the
    inverse transform, so output classes stay in {0, 1, 2}.
    """
    h, w = sketch.classes.shape
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0

    theta = np.radians(rng.uniform(-max_rotate_deg, max_rotate_deg))
    scale = 1.0 + rng.uniform(-max_scale, max_scale)
    tx = rng.uniform(-max_translate, max_translate) * w
    ty = rng.uniform(-max_translate, max_translate) * h

    # Inverse affine: undo translation, then rotation/scale about center.
    x = cols - cx - tx
    y = rows - cy - ty
    cos_t, sin_t = np.cos(-theta), np.sin(-theta)
    src_x = (x * cos_t - y * sin_t) / scale + cx
    src_y = (x * sin_t + y * cos_t) / scale + cy

    # Elastic field: coarse random grid upsampled to image size.
    coarse = rng.uniform(-max_elastic_px, max_elastic_px, size=(2, 4, 4))
    grid_r = np.linspace(0, 3, h)
    grid_c = np.linspace(0, 3, w)
    rr, cc = np.meshgrid(grid_r, grid_c, indexing="ij")
    dx = ndimage.map_coordinates(coarse[0], [rr, cc], order=1, mode="nearest")
    dy = ndimage.map_coordinates(coarse[1], [rr, cc], order=1, mode="nearest")
    src_x = src_x + dx
    src_y = src_y + dy

    warped = ndimage.map_coordinates(
        sketch.classes, [src_y, src_x], order=0, mode="constant", cval=BACKGROUND
    )
    return SketchImage(warped.astype(np.uint8))


@dataclass(frozen=True)
class SketchDiff:
    erased: np.ndarray  # strokes present before, background now
    added: np.ndarray  # background before, stroke now


def sketch_diff(before: SketchImage, after: SketchImage) -> SketchDiff:
    if before.classes.shape != after.classes.shape:
        raise ValueError("sketch sizes differ")
    return SketchDiff(
        erased=before.strokes & ~after.strokes,
        added=~before.strokes & after.strokes,
    )
