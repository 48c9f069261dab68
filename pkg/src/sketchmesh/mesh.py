"""Triangle meshes in two forms: float soup and quantized set.

A ``RealMesh`` is an (F, 3, 3) float array of triangle corners, no shared
vertex table. A ``QuantizedMesh`` is a set of triangles over an integer
grid; it is the form all editing operates on, because set algebra over
exact coordinates is what makes deletion/addition composable.

Triangles are stored in a canonical form: the three vertices sorted by
(z, y, x). That makes triangle identity independent of winding and makes
every derived ordering deterministic.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import BinsMismatchError, EmptyMeshError

Vertex = tuple[int, int, int]
Triangle = tuple[Vertex, Vertex, Vertex]

DEFAULT_BINS = 128


def vertex_key(v: Vertex) -> tuple[int, int, int]:
    """Sort key placing z first, then y, then x."""
    return (v[2], v[1], v[0])


def canonical_triangle(a: Vertex, b: Vertex, c: Vertex) -> Optional[Triangle]:
    """Return the triangle with vertices in (z, y, x) order.

    Degenerate input (repeated vertex) returns None so callers can count
    and drop it.
    """
    if a == b or b == c or a == c:
        return None
    va, vb, vc = sorted((a, b, c), key=vertex_key)
    return (va, vb, vc)


def triangle_key(t: Triangle):
    return (vertex_key(t[0]), vertex_key(t[1]), vertex_key(t[2]))


@dataclass(frozen=True)
class RealMesh:
    """Float triangle soup, shape (F, 3, 3)."""

    triangles: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.triangles, dtype=np.float64)
        if arr.size == 0:
            arr = arr.reshape(0, 3, 3)
        if arr.ndim != 3 or arr.shape[1:] != (3, 3):
            raise ValueError(f"expected (F, 3, 3) triangle array, got {arr.shape}")
        object.__setattr__(self, "triangles", arr)

    @property
    def face_count(self) -> int:
        return self.triangles.shape[0]

    def vertices(self) -> np.ndarray:
        """All corners flattened to (3F, 3)."""
        return self.triangles.reshape(-1, 3)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if self.face_count == 0:
            raise EmptyMeshError("empty mesh has no bounds")
        pts = self.vertices()
        return pts.min(axis=0), pts.max(axis=0)


@dataclass(frozen=True)
class QuantizedMesh:
    """Set of canonical triangles over a ``bins``-wide integer grid."""

    triangles: frozenset[Triangle]
    bins: int = DEFAULT_BINS

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError("bins must be at least 2")
        object.__setattr__(self, "triangles", frozenset(self.triangles))
        hi = self.bins - 1
        for t in self.triangles:
            a, b, c = t
            if canonical_triangle(a, b, c) != t:
                raise ValueError(f"triangle not canonical: {t}")
            for v in t:
                if any(coord < 0 or coord > hi for coord in v):
                    raise ValueError(f"vertex {v} outside [0, {hi}]")

    @property
    def face_count(self) -> int:
        return len(self.triangles)

    def vertex_set(self) -> frozenset[Vertex]:
        return frozenset(v for t in self.triangles for v in t)

    def ordered(self) -> list[Triangle]:
        """Triangles in canonical (z, y, x) lexicographic order."""
        return sorted(self.triangles, key=triangle_key)

    def __or__(self, other: "QuantizedMesh") -> "QuantizedMesh":
        return merge(self, other)

    def __sub__(self, other: "QuantizedMesh") -> "QuantizedMesh":
        if self.bins != other.bins:
            raise BinsMismatchError(self.bins, other.bins)
        return QuantizedMesh(self.triangles - other.triangles, self.bins)


def mesh_from_triangles(
    triangles: Iterable[tuple[Vertex, Vertex, Vertex]],
    bins: int = DEFAULT_BINS,
    counters: Optional[Counter] = None,
) -> QuantizedMesh:
    """Build a QuantizedMesh, canonicalising, dropping degenerates, deduping.

    ``counters`` (if given) is incremented at keys ``degenerate_dropped``
    and ``duplicates_merged``.
    """
    out = set()
    for a, b, c in triangles:
        t = canonical_triangle(a, b, c)
        if t is None:
            if counters is not None:
                counters["degenerate_dropped"] += 1
            continue
        if t in out:
            if counters is not None:
                counters["duplicates_merged"] += 1
            continue
        out.add(t)
    return QuantizedMesh(frozenset(out), bins)


def normalize_to_unit_cube(mesh: RealMesh) -> RealMesh:
    """Scale and translate so the longest bbox side spans 1, centered in [0,1]^3.

    Uniform scale (no aspect change). A mesh whose bbox is a single point
    maps to the cube center.
    """
    lo, hi = mesh.bounds()
    extent = hi - lo
    longest = float(extent.max())
    scale = 1.0 / longest if longest > 0 else 1.0
    center = (lo + hi) / 2.0
    shifted = (mesh.triangles - center) * scale + 0.5
    return RealMesh(shifted)


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def quantize(
    mesh: RealMesh,
    bins: int = DEFAULT_BINS,
    counters: Optional[Counter] = None,
) -> QuantizedMesh:
    """Snap [0,1] coordinates to ``bins`` levels: round(c * (bins - 1)).

    Coordinates are clipped to the grid first, so inputs slightly outside
    [0,1] (float noise after normalisation) stay valid. Triangles whose
    vertices collapse onto the same grid point are dropped and counted;
    duplicates after snapping are merged and counted.
    """
    arr = np.clip(mesh.triangles, 0.0, 1.0)
    grid = _round_half_up(arr * (bins - 1)).astype(np.int64)

    def to_tri(row):
        return tuple(tuple(int(c) for c in v) for v in row)

    return mesh_from_triangles((to_tri(row) for row in grid), bins, counters)


def dequantize(mesh: QuantizedMesh) -> RealMesh:
    """Map grid points back to cell centers c / (bins - 1), canonical order."""
    tris = mesh.ordered()
    if not tris:
        return RealMesh(np.zeros((0, 3, 3)))
    arr = np.array(tris, dtype=np.float64) / (mesh.bins - 1)
    return RealMesh(arr)


def prune(
    mesh: QuantizedMesh, deleted: Iterable[Vertex]
) -> tuple[QuantizedMesh, QuantizedMesh]:
    """Split a mesh by a deleted-vertex set.

    Returns ``(removed, kept)``: removed holds every triangle with at
    least one vertex in ``deleted``, kept holds the rest. The two parts
    partition the input.
    """
    dropped = set(deleted)
    removed = frozenset(t for t in mesh.triangles if any(v in dropped for v in t))
    kept = mesh.triangles - removed
    return (
        QuantizedMesh(removed, mesh.bins),
        QuantizedMesh(kept, mesh.bins),
    )


def merge(a: QuantizedMesh, b: QuantizedMesh) -> QuantizedMesh:
    """Set union. Raises if the grids differ."""
    if a.bins != b.bins:
        raise BinsMismatchError(a.bins, b.bins)
    return QuantizedMesh(a.triangles | b.triangles, a.bins)
