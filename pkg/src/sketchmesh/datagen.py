"""Edit-sample synthesis: carve a mesh into kept/removed parts and draw
the sketch a user would have given to cause that edit.

One sample starts from a complete mesh. Two random axis volumes define
the target (everything the edit touches) and the kept part; triangles
are kept by vertex membership. If the target alone already covers
almost the whole silhouette, the target degrades to the full mesh, so
the sample becomes a from-scratch creation. A camera is drawn, the
sketch is synthesised from the target's render, and the strokes over
the removed part's visible pixels become the edit strokes.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyMeshError, SampleRejected
from .mesh import (
    DEFAULT_BINS,
    QuantizedMesh,
    RealMesh,
    normalize_to_unit_cube,
    quantize,
)
from .obj_io import load_obj, save_obj
from .render import CameraPose, coverage_fraction, sample_camera
from .sketch import SketchImage, augment_sketch, save_png, synth_sketch
from .volumes import (
    EVERYTHING,
    SampleVolume,
    crop,
    sample_region,
    sample_volume_pair,
)

COVERAGE_LIMIT = 0.95
MAX_FACES = 768
VOLUME_RETRIES = 8


@dataclass
class EditSample:
    complete: QuantizedMesh  # the full mesh the edit should reconstruct
    target: QuantizedMesh  # crop(complete, volume)
    kept: QuantizedMesh  # crop(target, keep_volume)
    removed: QuantizedMesh  # target minus kept
    camera: CameraPose
    volume: SampleVolume
    keep_volume: SampleVolume
    sketch: Optional[SketchImage] = None
    meta: dict = field(default_factory=dict)


def make_edit_sample(
    complete: RealMesh,
    rng: np.random.Generator,
    *,
    bins: int = DEFAULT_BINS,
    image_size: int = 512,
    with_sketch: bool = True,
    coverage_limit: float = COVERAGE_LIMIT,
    retries: int = VOLUME_RETRIES,
) -> EditSample:
    """Draw volumes and a camera for one edit sample.

    Volume pairs that leave the removed part empty are redrawn up to
    ``retries`` times; after that the target degrades to the whole mesh
    (a creation sample). If even that has nothing to remove the sample
    is rejected.
    """
    if complete.face_count == 0:
        raise EmptyMeshError("cannot sample edits from an empty mesh")
    quantized = quantize(normalize_to_unit_cube(complete), bins)
    if quantized.face_count == 0:
        raise SampleRejected("mesh collapsed under quantization")
    camera = sample_camera(rng, image_size)

    meta: dict = {}
    chosen = None
    for _ in range(retries):
        volume, keep_volume = sample_volume_pair(rng)
        target = crop(quantized, volume)
        if target.face_count == 0:
            continue
        if not volume.everything:
            if coverage_fraction(target, quantized, camera) > coverage_limit:
                volume = EVERYTHING
                target = quantized
        kept = crop(target, keep_volume)
        removed = target - kept
        if removed.face_count == 0:
            continue
        chosen = (volume, keep_volume, target, kept, removed)
        break
    if chosen is None:
        # Degrade: the target becomes the whole mesh, keep volume redrawn.
        volume = EVERYTHING
        target = quantized
        for _ in range(retries):
            keep_volume = SampleVolume((sample_region(rng),))
            kept = crop(target, keep_volume)
            removed = target - kept
            if removed.face_count:
                meta["degraded_to_everything"] = True
                chosen = (volume, keep_volume, target, kept, removed)
                break
        if chosen is None:
            raise SampleRejected("no removable triangles under any drawn volume")
    volume, keep_volume, target, kept, removed = chosen

    sketch = None
    if with_sketch:
        sketch = synth_sketch(target, removed, camera)
        if not sketch.edit_mask.any():
            meta["edit_strokes_empty"] = True
    return EditSample(
        complete=quantized,
        target=target,
        kept=kept,
        removed=removed,
        camera=camera,
        volume=volume,
        keep_volume=keep_volume,
        sketch=sketch,
        meta=meta,
    )


def augment_mesh(
    mesh: RealMesh,
    rng: np.random.Generator,
    low: float = 0.9,
    high: float = 1.1,
) -> RealMesh:
    """Independent per-axis scaling; renormalised afterwards."""
    scale = rng.uniform(low, high, size=3)
    return normalize_to_unit_cube(RealMesh(mesh.triangles * scale))


def load_corpus(corpus_dir: Path, max_faces: int = MAX_FACES) -> list[Path]:
    """OBJ files under the directory whose face count is below the limit."""
    paths = []
    for p in sorted(Path(corpus_dir).rglob("*.obj")):
        try:
            mesh = load_obj(p)
        except Exception:
            continue
        if 0 < mesh.face_count < max_faces:
            paths.append(p)
    return paths


def write_sample(sample: EditSample, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_obj(sample.complete, out_dir / "complete.obj")
    save_obj(sample.target, out_dir / "target.obj")
    save_obj(sample.kept, out_dir / "kept.obj")
    save_obj(sample.removed, out_dir / "removed.obj")
    if sample.sketch is not None:
        save_png(sample.sketch, out_dir / "sketch.png")
    meta = {
        "bins": sample.complete.bins,
        "camera": sample.camera.to_json(),
        "volume": sample.volume.to_json(),
        "keep_volume": sample.keep_volume.to_json(),
        "faces": {
            "complete": sample.complete.face_count,
            "target": sample.target.face_count,
            "kept": sample.kept.face_count,
            "removed": sample.removed.face_count,
        },
        "flags": sample.meta,
    }
    (out_dir / "meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def generate_dataset(
    corpus: Sequence[Path],
    out_dir: Path,
    count: int,
    seed: int,
    *,
    bins: int = DEFAULT_BINS,
    image_size: int = 512,
    augment: bool = True,
    mesh_retries: int = 20,
) -> list[Path]:
    """Write ``count`` sample directories under ``out_dir``.

    Each sample runs on its own generator seeded with ``seed ^ index``,
    so outputs are reproducible regardless of order or restarts. A
    rejected draw moves to another corpus mesh, bounded per sample.
    """
    if not corpus:
        raise ValueError("corpus is empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i in range(count):
        rng = np.random.default_rng(seed ^ i)
        sample = None
        for _ in range(mesh_retries):
            path = corpus[int(rng.integers(0, len(corpus)))]
            mesh = load_obj(path)
            if augment:
                mesh = augment_mesh(mesh, rng)
            try:
                sample = make_edit_sample(
                    mesh, rng, bins=bins, image_size=image_size
                )
                break
            except SampleRejected:
                continue
        if sample is None:
            raise SampleRejected(f"sample {i}: all corpus draws rejected")
        if sample.sketch is not None:
            sample.sketch = augment_or_keep(sample, rng, augment)
        sample_dir = out_dir / f"sample_{i:05d}"
        write_sample(sample, sample_dir)
        written.append(sample_dir)
    return written


def augment_or_keep(
    sample: EditSample, rng: np.random.Generator, augment: bool
) -> SketchImage:
    if not augment or sample.sketch is None:
        return sample.sketch
    return augment_sketch(sample.sketch, rng)
