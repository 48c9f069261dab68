"""Sketch-driven triangle-mesh creation and editing.

Meshes live as exact triangle sets on an integer grid, serialise to a
compact token language, and come back unchanged. Edits decompose into a
deletion (erased strokes -> vertex labels -> pruned triangles) and an
addition (generated token continuation merged into the kept mesh), with
a vertex-aligned speculator cutting decode passes to one per vertex.
"""

from .codec import (
    END,
    SPLIT,
    START,
    TokenSequence,
    detokenize,
    fragment_sequence,
    read_tokens,
    tokenize,
    validate,
    write_tokens,
)
from .errors import (
    BinsMismatchError,
    EmptyMeshError,
    ObjParseError,
    SampleRejected,
    SequenceValidationError,
    SketchMeshError,
)
from .mesh import (
    DEFAULT_BINS,
    QuantizedMesh,
    RealMesh,
    dequantize,
    merge,
    mesh_from_triangles,
    normalize_to_unit_cube,
    prune,
    quantize,
)
from .obj_io import dumps_obj, load_obj, loads_obj, save_obj
from .render import CameraPose, rasterize, sample_camera, visibility_mask
from .sketch import SketchImage, from_png_bytes, synth_sketch, to_png_bytes

__version__ = "0.1.0"

__all__ = [
    "BinsMismatchError",
    "CameraPose",
    "DEFAULT_BINS",
    "END",
    "EmptyMeshError",
    "ObjParseError",
    "QuantizedMesh",
    "RealMesh",
    "SPLIT",
    "START",
    "SampleRejected",
    "SequenceValidationError",
    "SketchImage",
    "SketchMeshError",
    "TokenSequence",
    "dequantize",
    "detokenize",
    "dumps_obj",
    "fragment_sequence",
    "from_png_bytes",
    "load_obj",
    "loads_obj",
    "merge",
    "mesh_from_triangles",
    "normalize_to_unit_cube",
    "prune",
    "quantize",
    "rasterize",
    "read_tokens",
    "sample_camera",
    "save_obj",
    "synth_sketch",
    "to_png_bytes",
    "tokenize",
    "validate",
    "visibility_mask",
    "write_tokens",
]
