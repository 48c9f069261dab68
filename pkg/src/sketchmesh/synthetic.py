"""Procedural meshes for tests, benchmarks, and the bundled demo corpus."""

from __future__ import annotations

import numpy as np

from .mesh import (
    DEFAULT_BINS,
    QuantizedMesh,
    RealMesh,
    Vertex,
    canonical_triangle,
    dequantize,
    mesh_from_triangles,
)


def strip_mesh(n_triangles: int, bins: int = DEFAULT_BINS) -> QuantizedMesh:
    """A single triangle strip climbing in z.

    Vertex k is (k mod 2, 0, k); strictly increasing z keeps the strip
    aligned with the canonical traversal, so it encodes as one chain.
    """
    if n_triangles < 1 or n_triangles + 2 > bins:
        raise ValueError("strip does not fit the grid")
    verts = [(k % 2, 0, k) for k in range(n_triangles + 2)]
    tris = [
        (verts[k], verts[k + 1], verts[k + 2]) for k in range(n_triangles)
    ]
    return mesh_from_triangles(tris, bins)


def box_mesh(
    lo=(0.2, 0.2, 0.2), hi=(0.8, 0.8, 0.8)
) -> RealMesh:
    """Axis-aligned box as 12 triangles."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    corners = np.array(
        [
            [lo[0], lo[1], lo[2]],
            [hi[0], lo[1], lo[2]],
            [lo[0], hi[1], lo[2]],
            [hi[0], hi[1], lo[2]],
            [lo[0], lo[1], hi[2]],
            [hi[0], lo[1], hi[2]],
            [lo[0], hi[1], hi[2]],
            [hi[0], hi[1], hi[2]],
        ]
    )
    quads = [
        (0, 1, 3, 2),
        (4, 6, 7, 5),
        (0, 4, 5, 1),
        (2, 3, 7, 6),
        (0, 2, 6, 4),
        (1, 5, 7, 3),
    ]
    tris = []
    for a, b, c, d in quads:
        tris.append(corners[[a, b, c]])
        tris.append(corners[[a, c, d]])
    return RealMesh(np.stack(tris))


def random_mesh(
    rng: np.random.Generator,
    n_faces: int,
    bins: int = DEFAULT_BINS,
    spread: int = 0,
) -> QuantizedMesh:
    """Random mix of strips and fans on the grid, exactly ``n_faces`` faces.

    Walks grow from random seeds; each step either extends the current
    strip edge or fans around the previous vertex, occasionally jumping
    to a fresh seed so multi-component meshes occur. Duplicate or
    degenerate candidates are skipped, so the result is always a valid
    triangle set. ``spread`` bounds the walk step; 0 picks a size that
    renders triangles at a visible scale.
    """
    if n_faces < 1:
        raise ValueError("need at least one face")
    hi = bins - 1
    if spread <= 0:
        spread = max(3, bins // 10)
    tris: set = set()

    def rand_vertex() -> Vertex:
        return tuple(int(c) for c in rng.integers(0, bins, size=3))

    def nearby(v: Vertex) -> Vertex:
        step = rng.integers(-spread, spread + 1, size=3)
        return tuple(int(np.clip(v[i] + step[i], 0, hi)) for i in range(3))

    a, b = rand_vertex(), None
    while b is None or b == a:
        b = nearby(a)
    attempts = 0
    while len(tris) < n_faces and attempts < 200 * n_faces:
        attempts += 1
        c = nearby(b)
        t = canonical_triangle(a, b, c)
        if t is None or t in tris:
            if attempts % 7 == 0:  # stuck, reseed
                a = rand_vertex()
                b = nearby(a)
            continue
        tris.add(t)
        mode = rng.random()
        if mode < 0.65:  # strip: advance the edge
            a, b = b, c
        elif mode < 0.9:  # fan: keep pivot, swing the edge
            b = c
        else:  # new component
            a = rand_vertex()
            b = nearby(a)
        while b == a:
            b = nearby(a)
    if len(tris) < n_faces:
        raise RuntimeError("random walk failed to reach requested face count")
    return QuantizedMesh(frozenset(tris), bins)


def random_real_mesh(
    rng: np.random.Generator, n_faces: int, bins: int = DEFAULT_BINS
) -> RealMesh:
    return dequantize(random_mesh(rng, n_faces, bins))


def quantized_box(
    rng: np.random.Generator,
    bins: int = DEFAULT_BINS,
    y_frac: float = None,
    jitter: int = 0,
) -> QuantizedMesh:
    """Box with random grid-aligned corners, optionally warped.

    ``y_frac`` pins the low-y corner to a fraction of the feasible
    range, letting a corpus builder keep its members distinct.
    ``jitter`` perturbs each corner independently; a warped box has
    (mostly) distinct coordinate values per corner, where a perfect
    box reuses just two values per axis.
    """
    hi = bins - 1
    span = max(6, bins // 6)
    lo_pt = rng.integers(jitter, hi - span - jitter, size=3)
    if y_frac is not None:
        lo_pt[1] = int(round(y_frac * (hi - span - 2 * jitter - 1))) + jitter
    hi_pt = lo_pt + rng.integers(span // 2, span + 1, size=3)
    xs = (int(lo_pt[0]), int(hi_pt[0]))
    ys = (int(lo_pt[1]), int(hi_pt[1]))
    zs = (int(lo_pt[2]), int(hi_pt[2]))
    c = [(x, y, z) for z in zs for y in ys for x in xs]
    if jitter:
        c = [
            tuple(
                int(np.clip(v + rng.integers(-jitter, jitter + 1), 0, hi))
                for v in corner
            )
            for corner in c
        ]
    quads = [
        (0, 1, 3, 2),
        (4, 6, 7, 5),
        (0, 4, 5, 1),
        (2, 3, 7, 6),
        (0, 2, 6, 4),
        (1, 5, 7, 3),
    ]
    tris = []
    for a, b, cc, d in quads:
        tris.append((c[a], c[b], c[cc]))
        tris.append((c[a], c[cc], c[d]))
    return mesh_from_triangles(tris, bins)


def sheet_mesh(
    rng: np.random.Generator,
    rows: int = 6,
    cols: int = 6,
    jitter: int = 3,
    bins: int = DEFAULT_BINS,
    y_frac: float = None,
) -> QuantizedMesh:
    """Jittered height-field sheet: a grid of quads with creased folds.

    Every interior edge is a crease, so a render of the sheet produces
    strokes near every vertex; useful wherever stroke coverage matters.
    ``y_frac`` pins the sheet's y origin as in ``quantized_box``.
    """
    hi = bins - 1
    span = rng.integers(bins // 2, bins - 2)
    x0 = int(rng.integers(0, bins - span))
    y0 = int(rng.integers(0, bins - span))
    if y_frac is not None:
        y0 = int(round(y_frac * (bins - span - 1)))
    z0 = int(rng.integers(jitter, bins - span // 2 - jitter))
    xs = np.linspace(x0, x0 + span, cols + 1).astype(int)
    ys = np.linspace(y0, y0 + span, rows + 1).astype(int)
    grid = {}
    for r in range(rows + 1):
        for s in range(cols + 1):
            z = z0 + (r + s) * span // (2 * (rows + cols)) + int(
                rng.integers(-jitter, jitter + 1)
            )
            grid[(r, s)] = (
                int(xs[s]),
                int(ys[r]),
                int(np.clip(z, 0, hi)),
            )
    tris = []
    for r in range(rows):
        for s in range(cols):
            a, b = grid[(r, s)], grid[(r, s + 1)]
            c, d = grid[(r + 1, s + 1)], grid[(r + 1, s)]
            tris.append((a, b, c))
            tris.append((a, c, d))
    return mesh_from_triangles(tris, bins)


def toy_corpus(
    rng: np.random.Generator, count: int, bins: int = DEFAULT_BINS
) -> list[QuantizedMesh]:
    """Structured quantized meshes: warped boxes, sheets, strip pairs.

    The kind of regular geometry the counting reference models are
    meant for, built so short contexts stay unambiguous: each member
    gets a distinct y anchor (no two corpus meshes are near-duplicates)
    and corner jitter keeps coordinate values from repeating within a
    member (a perfect box has two values per axis, which makes its
    own traversal self-colliding for any short-context model).
    """
    out = []
    while len(out) < count:
        i = len(out)
        kind = i % 3
        y_frac = (i + 0.5) / count
        if kind == 0:
            out.append(quantized_box(rng, bins, y_frac=y_frac, jitter=2))
        elif kind == 1:
            out.append(
                sheet_mesh(
                    rng,
                    rows=int(rng.integers(3, 7)),
                    cols=int(rng.integers(3, 7)),
                    bins=bins,
                    y_frac=y_frac,
                )
            )
        else:
            out.append(double_strip(rng, bins, y_frac=y_frac))
    return out


def shifted_strip(
    rng: np.random.Generator,
    n_triangles: int,
    bins: int = DEFAULT_BINS,
    y_frac: float = None,
) -> QuantizedMesh:
    """The canonical strip translated to a random grid offset."""
    hi = bins - 1
    width = int(rng.integers(2, max(3, bins // 8)))
    dx = int(rng.integers(0, bins - width - 1))
    dy = int(rng.integers(0, hi)) if y_frac is None else int(round(y_frac * hi))
    dz = int(rng.integers(0, bins - n_triangles - 2))
    verts = [((k % 2) * width + dx, dy, k + dz) for k in range(n_triangles + 2)]
    tris = [(verts[k], verts[k + 1], verts[k + 2]) for k in range(n_triangles)]
    return mesh_from_triangles(tris, bins)


def double_strip(
    rng: np.random.Generator,
    bins: int = DEFAULT_BINS,
    y_frac: float = None,
) -> QuantizedMesh:
    """Two parallel disconnected strips; always at least two chains.

    The strips share a y anchor but sit at disjoint x offsets, so
    neither shadows the other's traversal contexts.
    """
    hi = bins - 1
    dy = int(rng.integers(0, hi)) if y_frac is None else int(round(y_frac * hi))
    half = bins // 2
    tris = []
    for side in range(2):
        n = int(rng.integers(5, 14))
        width = int(rng.integers(2, 6))
        dx = side * half + int(rng.integers(0, half - width - 1))
        dz = int(rng.integers(0, bins - n - 2))
        verts = [((k % 2) * width + dx, dy, k + dz) for k in range(n + 2)]
        tris.extend((verts[k], verts[k + 1], verts[k + 2]) for k in range(n))
    return mesh_from_triangles(tris, bins)


def demo_corpus(
    rng: np.random.Generator,
    count: int = 12,
    min_faces: int = 24,
    max_faces: int = 200,
    bins: int = DEFAULT_BINS,
) -> list[RealMesh]:
    """Small varied corpus of real meshes used by the CLI defaults."""
    out = []
    for _ in range(count):
        n = int(rng.integers(min_faces, max_faces + 1))
        out.append(random_real_mesh(rng, n, bins))
    return out
