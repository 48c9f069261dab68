#!/usr/bin/env python3
"""Generate (and verify) the binary test fixtures for the UI package.

Run from frontend/:

    python3 scripts/make_fixtures.py            # write Pillow PNGs + OBJs + class JSONs
    python3 scripts/make_fixtures.py --verify   # cross-check the client-encoded PNGs

The verify step decodes the PNGs written by the TypeScript encoder
(scripts/make_client_fixture.mjs) with Pillow and asserts they carry exactly
the class patterns recorded in the JSON files, proving the two codecs agree
at the pixel level.
"""

import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

COLORS = {0: (255, 255, 255), 1: (0, 0, 0), 2: (255, 0, 0)}

BINS = 128


def tiny_pattern():
    classes = np.zeros((4, 5), dtype=np.uint8)
    classes[0, :] = 0
    classes[1, 1:4] = 1
    classes[2, 2] = 2
    classes[3, 0] = 1
    classes[3, 4] = 2
    return classes


def grid_pattern(size=160):
    """Deterministic mixed pattern big enough to span >1 stored deflate block."""
    classes = np.zeros((size, size), dtype=np.uint8)
    yy, xx = np.mgrid[0:size, 0:size]
    classes[(xx // 7 + yy // 5) % 3 == 1] = 1
    classes[(xx * 31 + yy * 17) % 97 == 0] = 2
    return classes


def filtered_pattern(size=64):
    rng = np.random.default_rng(42)
    classes = rng.choice([0, 0, 0, 1, 1, 2], size=(size, size)).astype(np.uint8)
    return classes


def to_rgb(classes):
    rgb = np.empty(classes.shape + (3,), dtype=np.uint8)
    for cls, color in COLORS.items():
        rgb[classes == cls] = color
    return rgb


def write_classes_json(name, classes):
    doc = {
        "width": int(classes.shape[1]),
        "height": int(classes.shape[0]),
        "classes": classes.flatten().tolist(),
    }
    (FIXTURES / name).write_text(json.dumps(doc))


def sheet(x_lo, z_base=34):
    from sketchmesh.mesh import mesh_from_triangles

    tris = []
    for z0 in (z_base, z_base + 30):
        a = (x_lo, 64, z0)
        b = (x_lo + 20, 64, z0)
        c = (x_lo, 64, z0 + 30)
        d = (x_lo + 20, 64, z0 + 30)
        tris += [(a, b, c), (b, d, c)]
    return mesh_from_triangles(tris, BINS)


def generate():
    FIXTURES.mkdir(parents=True, exist_ok=True)

    tiny = tiny_pattern()
    write_classes_json("tiny_classes.json", tiny)
    Image.fromarray(to_rgb(tiny), "RGB").save(FIXTURES / "sketch_tiny_pillow.png")

    filt = filtered_pattern()
    write_classes_json("filtered_classes.json", filt)
    Image.fromarray(to_rgb(filt), "RGB").save(FIXTURES / "sketch_filtered_pillow.png")

    grid = grid_pattern()
    write_classes_json("grid_classes.json", grid)

    bad = to_rgb(tiny_pattern())
    bad[0, 0] = (0, 255, 0)
    Image.fromarray(bad, "RGB").save(FIXTURES / "sketch_bad_color.png")

    from sketchmesh.mesh import dequantize, merge
    from sketchmesh.obj_io import save_obj

    initial = merge(sheet(0), sheet(107))
    save_obj(dequantize(initial), FIXTURES / "initial.obj")
    save_obj(dequantize(sheet(50, z_base=65)), FIXTURES / "addition.obj")
    print("fixtures written to", FIXTURES)


def verify():
    failures = []
    for png_name, json_name in [
        ("sketch_tiny_client.png", "tiny_classes.json"),
        ("sketch_grid_client.png", "grid_classes.json"),
    ]:
        doc = json.loads((FIXTURES / json_name).read_text())
        expected = np.array(doc["classes"], dtype=np.uint8).reshape(
            doc["height"], doc["width"]
        )
        img = Image.open(FIXTURES / png_name).convert("RGB")
        rgb = np.asarray(img)
        classes = np.full(rgb.shape[:2], 255, dtype=np.uint8)
        for cls, color in COLORS.items():
            classes[(rgb == color).all(axis=-1)] = cls
        if (classes == 255).any():
            failures.append(f"{png_name}: contains off-palette pixels")
        elif not np.array_equal(classes, expected):
            failures.append(f"{png_name}: classes differ from {json_name}")
        else:
            print(f"{png_name}: Pillow decode matches {json_name}")
    if failures:
        for f in failures:
            print("FAIL:", f)
        return 1
    return 0


if __name__ == "__main__":
    if "--verify" in sys.argv:
        sys.exit(verify())
    generate()
