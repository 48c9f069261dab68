"""Wavefront OBJ reading and writing, triangles only.

Only ``v`` and ``f`` records matter; everything else is skipped. Faces
with more than three corners are fan-triangulated around the first
corner. Indices are 1-based, negatives count back from the current
vertex list. Writing uses ``repr`` floats so a save/load round trip is
exact.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ObjParseError
from .mesh import QuantizedMesh, RealMesh, dequantize


def _parse(lines) -> RealMesh:
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise ObjParseError("vertex needs 3 coordinates", lineno)
            try:
                vertices.append(tuple(float(p) for p in parts[1:4]))
            except ValueError:
                raise ObjParseError(f"bad vertex coordinate in {line!r}", lineno)
        elif tag == "f":
            refs = parts[1:]
            if len(refs) < 3:
                raise ObjParseError("face needs at least 3 vertices", lineno)
            idx = []
            for ref in refs:
                head = ref.split("/")[0]
                try:
                    i = int(head)
                except ValueError:
                    raise ObjParseError(f"bad face index {ref!r}", lineno)
                if i == 0:
                    raise ObjParseError("face index 0 is invalid", lineno)
                i = i - 1 if i > 0 else len(vertices) + i
                if i < 0 or i >= len(vertices):
                    raise ObjParseError(f"face index {ref!r} out of range", lineno)
                idx.append(i)
            for k in range(1, len(idx) - 1):
                faces.append((idx[0], idx[k], idx[k + 1]))
    if not faces:
        return RealMesh(np.zeros((0, 3, 3)))
    varr = np.asarray(vertices, dtype=np.float64)
    return RealMesh(varr[np.asarray(faces, dtype=np.int64)])


def load_obj(path: Union[str, Path]) -> RealMesh:
    with open(path, "r", encoding="utf-8") as fh:
        return _parse(fh)


def loads_obj(text: str) -> RealMesh:
    return _parse(io.StringIO(text))


def dumps_obj(mesh: Union[RealMesh, QuantizedMesh]) -> str:
    """Serialise with a shared vertex table, triangles in stored order.

    Quantized input is dequantized first, which also fixes the order
    (canonical), so equal meshes serialise to identical bytes.
    """
    if isinstance(mesh, QuantizedMesh):
        mesh = dequantize(mesh)
    tris = mesh.triangles
    index: dict[tuple[float, float, float], int] = {}
    order: list[tuple[float, float, float]] = []
    faces = []
    for tri in tris:
        face = []
        for v in tri:
            key = (float(v[0]), float(v[1]), float(v[2]))
            if key not in index:
                index[key] = len(order) + 1
                order.append(key)
            face.append(index[key])
        faces.append(face)
    out = ["# sketchmesh"]
    for x, y, z in order:
        out.append(f"v {x!r} {y!r} {z!r}")
    for a, b, c in faces:
        out.append(f"f {a} {b} {c}")
    return "\n".join(out) + "\n"


def save_obj(mesh: Union[RealMesh, QuantizedMesh], path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_obj(mesh), encoding="utf-8")
