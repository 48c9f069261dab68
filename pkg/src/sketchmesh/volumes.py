"""Axis-aligned sampling volumes used to split a mesh into edit regions.

A region constrains one axis to a union of closed intervals; a volume is
a union of such regions (or everything). Membership, containment, and
the random pair sampler below follow the data-synthesis recipe: pick an
axis and one of four interval shapes with parameters drawn from fixed
ranges, and degrade to the whole space when the second region adds
nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .mesh import QuantizedMesh, RealMesh

AXIS_NAMES = ("x", "y", "z")

LOW_HALF = "low_half"
HIGH_HALF = "high_half"
SLAB = "slab"
ANTI_SLAB = "anti_slab"

A_RANGE = (0.2, 0.8)
B_RANGE = (0.4, 0.6)
C_RANGE = (0.1, 0.4)


@dataclass(frozen=True)
class AxisRegion:
    """One axis constrained to a union of closed intervals."""

    axis: int  # 0=x, 1=y, 2=z
    kind: str
    a: float = 0.0  # half-space threshold
    b: float = 0.0  # slab center
    c: float = 0.0  # slab half-width

    def __post_init__(self):
        if self.kind not in (LOW_HALF, HIGH_HALF, SLAB, ANTI_SLAB):
            raise ValueError(f"unknown region kind {self.kind!r}")
        if not 0 <= self.axis <= 2:
            raise ValueError(f"axis {self.axis} outside 0..2")

    def intervals(self) -> list[tuple[float, float]]:
        inf = math.inf
        if self.kind == LOW_HALF:
            return [(-inf, self.a)]
        if self.kind == HIGH_HALF:
            return [(self.a, inf)]
        if self.kind == SLAB:
            return [(self.b - self.c, self.b + self.c)]
        if self.kind == ANTI_SLAB:
            return [(-inf, self.b - self.c), (self.b + self.c, inf)]
        raise ValueError(f"unknown region kind {self.kind!r}")

    def contains_points(self, points: np.ndarray) -> np.ndarray:
        x = np.asarray(points, dtype=np.float64)[..., self.axis]
        mask = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.intervals():
            mask |= (x >= lo) & (x <= hi)
        return mask

    def to_json(self) -> dict:
        doc = {"axis": AXIS_NAMES[self.axis], "kind": self.kind}
        if self.kind in (LOW_HALF, HIGH_HALF):
            doc["a"] = self.a
        else:
            doc["b"] = self.b
            doc["c"] = self.c
        return doc

    @staticmethod
    def from_json(doc: dict) -> "AxisRegion":
        return AxisRegion(
            axis=AXIS_NAMES.index(doc["axis"]),
            kind=doc["kind"],
            a=float(doc.get("a", 0.0)),
            b=float(doc.get("b", 0.0)),
            c=float(doc.get("c", 0.0)),
        )


def region_contains(outer: AxisRegion, inner: AxisRegion) -> bool:
    """True iff every point of ``inner`` lies in ``outer``.

    Regions on different axes are unbounded along each other's axis, so
    neither can contain the other. On a shared axis, each inner interval
    must fit inside a single outer interval (outer intervals are
    disjoint with open gaps, so spanning two is impossible).
    """
    if outer.axis != inner.axis:
        return False
    outs = outer.intervals()
    for lo, hi in inner.intervals():
        if not any(olo <= lo and hi <= ohi for olo, ohi in outs):
            return False
    return True


@dataclass(frozen=True)
class SampleVolume:
    """Union of axis regions; ``everything`` short-circuits to all space."""

    regions: tuple[AxisRegion, ...] = ()
    everything: bool = False

    def contains_points(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        if self.everything:
            return np.ones(pts.shape[:-1], dtype=bool)
        mask = np.zeros(pts.shape[:-1], dtype=bool)
        for region in self.regions:
            mask |= region.contains_points(pts)
        return mask

    def to_json(self) -> dict:
        if self.everything:
            return {"everything": True}
        return {"regions": [r.to_json() for r in self.regions]}

    @staticmethod
    def from_json(doc: dict) -> "SampleVolume":
        if doc.get("everything"):
            return EVERYTHING
        return SampleVolume(
            tuple(AxisRegion.from_json(r) for r in doc.get("regions", ()))
        )


EVERYTHING = SampleVolume(everything=True)

_KINDS = (LOW_HALF, HIGH_HALF, SLAB, ANTI_SLAB)


def sample_region(rng: np.random.Generator) -> AxisRegion:
    """Draw axis uniformly, then one of the four shapes, then parameters."""
    axis = int(rng.integers(0, 3))
    kind = _KINDS[int(rng.integers(0, 4))]
    if kind in (LOW_HALF, HIGH_HALF):
        return AxisRegion(axis, kind, a=float(rng.uniform(*A_RANGE)))
    return AxisRegion(
        axis,
        kind,
        b=float(rng.uniform(*B_RANGE)),
        c=float(rng.uniform(*C_RANGE)),
    )


def sample_volume_pair(
    rng: np.random.Generator,
) -> tuple[SampleVolume, SampleVolume]:
    """Draw (L, L_k): target volume and keep volume.

    L_k is the first region alone; L is the union of both. When the
    second region is already inside the first, the union would equal
    L_k, so L degrades to everything instead.
    """
    first = sample_region(rng)
    second = sample_region(rng)
    keep = SampleVolume((first,))
    if region_contains(first, second):
        return EVERYTHING, keep
    return SampleVolume((first, second)), keep


def crop(
    mesh: Union[QuantizedMesh, RealMesh], volume: SampleVolume
) -> Union[QuantizedMesh, RealMesh]:
    """Triangles with at least one vertex inside the volume.

    Quantized meshes are tested in grid units mapped to [0, 1] (the same
    frame the volumes are sampled in).
    """
    if isinstance(mesh, QuantizedMesh):
        if volume.everything:
            return mesh
        tris = mesh.ordered()
        if not tris:
            return mesh
        arr = np.asarray(tris, dtype=np.float64) / (mesh.bins - 1)
        inside = volume.contains_points(arr.reshape(-1, 3)).reshape(-1, 3)
        keep = inside.any(axis=1)
        return QuantizedMesh(
            frozenset(t for t, k in zip(tris, keep) if k), mesh.bins
        )
    if volume.everything:
        return mesh
    if mesh.face_count == 0:
        return mesh
    inside = volume.contains_points(mesh.vertices()).reshape(-1, 3)
    return RealMesh(mesh.triangles[inside.any(axis=1)])
