"""Deletion: turn erased sketch strokes into per-vertex keep/delete labels.

Two labelers exist on purpose. The volume oracle knows which triangles
were removed and labels their vertices directly; it defines ground
truth. The geometric labeler only sees what a user gives us, erased
pixels and the camera, and marks the vertices that project into the
erased area (optionally only when actually visible there under a depth
check). The two routes are compared, never merged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .codec import TokenSequence, detokenize
from .edges import dilate
from .mesh import QuantizedMesh, Vertex, dequantize, prune
from .render import CameraPose, RenderBuffers, project_points, rasterize
from .sketch import SketchImage

KEEP = 1
DELETE = 0

STROKE_DILATION_PX = 4
DEPTH_TOL_FRACTION = 0.05

Labels = dict[Vertex, int]


def oracle_labels(mesh: QuantizedMesh, removed: QuantizedMesh) -> Labels:
    """Label 0 exactly the vertices of removed triangles."""
    doomed = removed.vertex_set()
    return {v: DELETE if v in doomed else KEEP for v in mesh.vertex_set()}


def default_depth_tolerance(mesh: QuantizedMesh) -> float:
    """5% of the bbox diagonal in normalised units."""
    pts = dequantize(mesh).vertices()
    if pts.size == 0:
        return 0.0
    diag = np.linalg.norm(pts.max(axis=0) - pts.min(axis=0))
    return DEPTH_TOL_FRACTION * float(diag)


def geometric_labels(
    mesh: QuantizedMesh,
    erased: np.ndarray,
    camera: CameraPose,
    *,
    dilation_px: int = STROKE_DILATION_PX,
    depth_test: bool = False,
    depth_tol: Optional[float] = None,
    buffers: Optional[RenderBuffers] = None,
) -> Labels:
    """Label 0 the vertices projecting into the dilated erased area.

    With ``depth_test`` a vertex must also sit within ``depth_tol`` of
    the z-buffer at its pixel, so strokes only reach the front surface.
    Vertices off screen are kept.
    """
    verts = sorted(mesh.vertex_set())
    labels: Labels = {v: KEEP for v in verts}
    if not verts or not erased.any():
        return labels
    region = dilate(erased, dilation_px)
    h, w = region.shape
    pts = np.asarray(verts, dtype=np.float64) / (mesh.bins - 1)
    pixels, depth = project_points(camera, pts)
    if depth_test:
        if buffers is None:
            buffers = rasterize(mesh, camera)
        if depth_tol is None:
            depth_tol = default_depth_tolerance(mesh)
    cols = np.floor(pixels[:, 0]).astype(np.int64)
    rows = np.floor(pixels[:, 1]).astype(np.int64)
    on_screen = (
        np.isfinite(depth)
        & (cols >= 0)
        & (cols < w)
        & (rows >= 0)
        & (rows < h)
    )
    for i, v in enumerate(verts):
        if not on_screen[i]:
            continue
        r, c = int(rows[i]), int(cols[i])
        if not region[r, c]:
            continue
        if depth_test:
            zbuf = buffers.depth[r, c]
            if not np.isfinite(zbuf) or abs(depth[i] - zbuf) > depth_tol:
                continue
        labels[v] = DELETE
    return labels


def apply_deletion(
    mesh: QuantizedMesh, labels: Labels
) -> tuple[QuantizedMesh, QuantizedMesh]:
    """(removed, kept) split from a label map."""
    doomed = {v for v, lab in labels.items() if lab == DELETE}
    return prune(mesh, doomed)


def label_metrics(predicted: Labels, truth: Labels) -> dict[str, float]:
    """Accuracy/precision/recall with delete as the positive class."""
    keys = truth.keys()
    tp = sum(1 for v in keys if truth[v] == DELETE and predicted.get(v) == DELETE)
    fp = sum(1 for v in keys if truth[v] == KEEP and predicted.get(v) == DELETE)
    fn = sum(1 for v in keys if truth[v] == DELETE and predicted.get(v) == KEEP)
    correct = sum(1 for v in keys if predicted.get(v) == truth[v])
    total = len(truth)
    return {
        "accuracy": correct / total if total else 1.0,
        "precision": tp / (tp + fp) if tp + fp else 1.0,
        "recall": tp / (tp + fn) if tp + fn else 1.0,
    }


@dataclass
class StrokeEraseClassifier:
    """Sequence-level deletion interface over the geometric labeler."""

    camera: CameraPose
    dilation_px: int = STROKE_DILATION_PX
    depth_test: bool = False
    depth_tol: Optional[float] = None

    def label(self, seq: TokenSequence, sketch: SketchImage) -> Labels:
        mesh = detokenize(seq)
        return geometric_labels(
            mesh,
            sketch.edit_mask,
            self.camera,
            dilation_px=self.dilation_px,
            depth_test=self.depth_test,
            depth_tol=self.depth_tol,
        )
