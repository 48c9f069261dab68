"""Geometry metrics: chamfer distance and mesh-quality statistics."""

from __future__ import annotations

from typing import Union

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyMeshError
from .mesh import QuantizedMesh, RealMesh, dequantize, vertex_key


def _as_real(mesh: Union[RealMesh, QuantizedMesh]) -> RealMesh:
    return dequantize(mesh) if isinstance(mesh, QuantizedMesh) else mesh


def sample_surface(
    mesh: Union[RealMesh, QuantizedMesh],
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Uniform area-weighted surface samples, (count, 3).

    A mesh with zero total area (all triangles degenerate in 3-D) falls
    back to sampling its corner points uniformly.
    """
    real = _as_real(mesh)
    tris = real.triangles
    if tris.shape[0] == 0:
        raise EmptyMeshError("cannot sample an empty mesh")
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    areas = 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)
    total = areas.sum()
    if total <= 0:
        corners = real.vertices()
        idx = rng.integers(0, corners.shape[0], size=count)
        return corners[idx]
    picks = rng.choice(tris.shape[0], size=count, p=areas / total)
    u = rng.random(count)
    v = rng.random(count)
    over = u + v > 1
    u[over] = 1 - u[over]
    v[over] = 1 - v[over]
    return (
        tris[picks, 0]
        + u[:, None] * e1[picks]
        + v[:, None] * e2[picks]
    )


def chamfer_points(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric mean of squared nearest-neighbour distances."""
    da, _ = cKDTree(b).query(a)
    db, _ = cKDTree(a).query(b)
    return (float(np.mean(da**2)) + float(np.mean(db**2))) / 2.0


def chamfer_distance(
    a: Union[RealMesh, QuantizedMesh],
    b: Union[RealMesh, QuantizedMesh],
    samples: int = 10_000,
    seed: int = 0,
) -> float:
    rng = np.random.default_rng(seed)
    pa = sample_surface(a, samples, rng)
    pb = sample_surface(b, samples, rng)
    return chamfer_points(pa, pb)


# --- quality statistics --------------------------------------------------


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[rj] = ri


def connected_components(mesh: QuantizedMesh) -> int:
    """Components under shared-vertex connectivity."""
    tris = mesh.ordered()
    if not tris:
        return 0
    verts = sorted(mesh.vertex_set(), key=vertex_key)
    index = {v: i for i, v in enumerate(verts)}
    uf = _UnionFind(len(verts))
    for a, b, c in tris:
        uf.union(index[a], index[b])
        uf.union(index[a], index[c])
    used = {uf.find(index[v]) for t in tris for v in t}
    return len(used)


def nonmanifold_edge_fraction(mesh: QuantizedMesh) -> float:
    """Fraction of edges bordered by more than two triangles."""
    counts: dict = {}
    for a, b, c in mesh.triangles:
        for e in ((a, b), (b, c), (a, c)):
            key = (e[0], e[1]) if vertex_key(e[0]) <= vertex_key(e[1]) else (e[1], e[0])
            counts[key] = counts.get(key, 0) + 1
    if not counts:
        return 0.0
    bad = sum(1 for n in counts.values() if n > 2)
    return bad / len(counts)


def _tri_tri_intersects(t1: np.ndarray, t2: np.ndarray) -> bool:
    """Moller-style interval test; shared-vertex contacts excluded by caller."""

    def plane(tri):
        n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
        return n, -float(n @ tri[0])

    n1, d1 = plane(t1)
    n2, d2 = plane(t2)
    if np.linalg.norm(n1) < 1e-15 or np.linalg.norm(n2) < 1e-15:
        return False  # degenerate in 3-D, skip
    dist2 = t2 @ n1 + d1
    if np.all(dist2 > 1e-12) or np.all(dist2 < -1e-12):
        return False
    dist1 = t1 @ n2 + d2
    if np.all(dist1 > 1e-12) or np.all(dist1 < -1e-12):
        return False
    direction = np.cross(n1, n2)
    axis = int(np.argmax(np.abs(direction)))
    if np.abs(direction).max() < 1e-15:
        # Coplanar: project onto the dominant plane axis pair and do 2-D tests.
        drop = int(np.argmax(np.abs(n1)))
        keep = [i for i in range(3) if i != drop]
        return _tri_tri_2d(t1[:, keep], t2[:, keep])

    def interval(tri, dist):
        proj = tri[:, axis]
        side = dist > 0
        # The vertex alone on its side of the plane sits at index `odd`.
        if side[0] == side[1]:
            odd = 2
        elif side[0] == side[2]:
            odd = 1
        else:
            odd = 0
        others = [i for i in range(3) if i != odd]
        pts = []
        for i in others:
            denom = dist[odd] - dist[i]
            if abs(denom) < 1e-30:
                pts.append(proj[i])
            else:
                s = dist[odd] / denom
                pts.append(proj[odd] + s * (proj[i] - proj[odd]))
        return min(pts), max(pts)

    lo1, hi1 = interval(t1, dist1)
    lo2, hi2 = interval(t2, dist2)
    return max(lo1, lo2) <= min(hi1, hi2) + 1e-12


def _cross2(u: np.ndarray, v: np.ndarray) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _tri_tri_2d(a: np.ndarray, b: np.ndarray) -> bool:
    def seg_cross(p, q, r, s):
        d1 = _cross2(q - p, r - p)
        d2 = _cross2(q - p, s - p)
        d3 = _cross2(s - r, p - r)
        d4 = _cross2(s - r, q - r)
        return (d1 * d2 <= 0) and (d3 * d4 <= 0)

    for i in range(3):
        for j in range(3):
            if seg_cross(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]):
                return True

    def inside(pt, tri):
        signs = [
            _cross2(tri[(k + 1) % 3] - tri[k], pt - tri[k]) for k in range(3)
        ]
        return all(s >= 0 for s in signs) or all(s <= 0 for s in signs)

    return inside(a[0], b) or inside(b[0], a)


def self_intersections(mesh: QuantizedMesh) -> int:
    """Count of triangle pairs that intersect without sharing a vertex.

    Pairs are pre-filtered by bbox overlap on a uniform grid, so the
    pairwise test only runs on plausible candidates.
    """
    tris = mesh.ordered()
    n = len(tris)
    if n < 2:
        return 0
    arr = np.asarray(tris, dtype=np.float64)
    lo = arr.min(axis=1)
    hi = arr.max(axis=1)
    # Hash triangles into coarse cells by bbox extent.
    cell = max(1.0, float(np.median(hi - lo).max()))
    buckets: dict = {}
    for i in range(n):
        c0 = np.floor(lo[i] / cell).astype(int)
        c1 = np.floor(hi[i] / cell).astype(int)
        for x in range(c0[0], c1[0] + 1):
            for y in range(c0[1], c1[1] + 1):
                for z in range(c0[2], c1[2] + 1):
                    buckets.setdefault((x, y, z), []).append(i)
    candidates = set()
    for members in buckets.values():
        for ai in range(len(members)):
            for bi in range(ai + 1, len(members)):
                candidates.add((members[ai], members[bi]))
    count = 0
    for i, j in candidates:
        if np.any(hi[i] < lo[j]) or np.any(hi[j] < lo[i]):
            continue
        si = set(tris[i])
        if si & set(tris[j]):
            continue
        if _tri_tri_intersects(arr[i], arr[j]):
            count += 1
    return count


def mesh_stats(mesh: QuantizedMesh) -> dict:
    return {
        "faces": mesh.face_count,
        "vertices": len(mesh.vertex_set()),
        "components": connected_components(mesh),
        "nonmanifold_edge_fraction": nonmanifold_edge_fraction(mesh),
        "self_intersections": self_intersections(mesh),
    }
