"""Command-line interface.

Subcommands cover the full pipeline: tokenize/detokenize for the codec,
datagen for sample synthesis, sketch for rendering a stroke image,
edit for offline additions/deletions, fit/bench for the decode models,
stats for mesh-quality numbers, serve for the HTTP service. Reports go
to stdout as JSON; bench and stats can additionally render a figure
next to that output.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import codec, datagen, metrics, synthetic
from .deletion import apply_deletion, geometric_labels
from .errors import SketchMeshError
from .generate import (
    DecodeConfig,
    bench_decode,
    corpus_pairs,
    fit_counting_model,
    fit_counting_speculator,
    generate_addition,
    load_tables,
    save_tables,
)
from .mesh import DEFAULT_BINS, merge, normalize_to_unit_cube, quantize
from .obj_io import load_obj, save_obj
from .render import CameraPose
from .sketch import load_png, save_png, sketch_diff, synth_sketch


def _camera_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--azimuth", type=float, default=30.0)
    parser.add_argument("--elevation", type=float, default=30.0)
    parser.add_argument("--image-size", type=int, default=512)
    parser.add_argument("--camera", help="camera JSON file; overrides the flags above")


def _camera_from(args, size: int) -> CameraPose:
    if args.camera:
        doc = json.loads(Path(args.camera).read_text(encoding="utf-8"))
        return CameraPose.from_json(doc)
    return CameraPose(azimuth=args.azimuth, elevation=args.elevation, size=size)


def _load_quantized(path: str, bins: int, normalize: bool):
    mesh = load_obj(path)
    if normalize:
        mesh = normalize_to_unit_cube(mesh)
    return quantize(mesh, bins)


def _training_pairs(args, rng):
    if args.corpus:
        paths = datagen.load_corpus(Path(args.corpus))
        if not paths:
            raise SketchMeshError(f"no usable meshes under {args.corpus}")
        meshes = [
            quantize(normalize_to_unit_cube(load_obj(p)), args.bins) for p in paths
        ]
    else:
        meshes = [
            quantize(m, args.bins)
            for m in synthetic.demo_corpus(rng, count=args.synthetic, bins=args.bins)
        ]
    return corpus_pairs([codec.tokenize(m) for m in meshes])


def cmd_tokenize(args) -> int:
    mesh = _load_quantized(args.input, args.bins, args.normalize)
    seq = codec.tokenize(mesh)
    if args.format == "bin":
        codec.write_tokens(seq, args.output)
    else:
        Path(args.output).write_text(codec.to_json(seq) + "\n", encoding="utf-8")
    print(json.dumps({"tokens": len(seq), "faces": mesh.face_count}, sort_keys=True))
    return 0


def cmd_detokenize(args) -> int:
    if args.format == "bin":
        seq = codec.read_tokens(args.input)
    else:
        seq = codec.from_json(Path(args.input).read_text(encoding="utf-8"))
    mesh = codec.detokenize(seq)
    save_obj(mesh, args.output)
    print(json.dumps({"faces": mesh.face_count}, sort_keys=True))
    return 0


def cmd_datagen(args) -> int:
    corpus = datagen.load_corpus(Path(args.corpus))
    if not corpus:
        raise SketchMeshError(f"no usable meshes under {args.corpus}")
    written = datagen.generate_dataset(
        corpus,
        Path(args.out),
        args.count,
        args.seed,
        bins=args.bins,
        image_size=args.image_size,
        augment=not args.no_augment,
    )
    print(json.dumps({"samples": len(written), "out": str(args.out)}, sort_keys=True))
    return 0


def cmd_sketch(args) -> int:
    mesh = _load_quantized(args.input, args.bins, args.normalize)
    camera = _camera_from(args, args.image_size)
    sketch = synth_sketch(mesh, None, camera)
    save_png(sketch, args.output)
    print(
        json.dumps(
            {"strokes": int(sketch.strokes.sum()), "size": camera.size},
            sort_keys=True,
        )
    )
    return 0


def cmd_edit(args) -> int:
    mesh = _load_quantized(args.input, args.bins, args.normalize)
    sketch = load_png(args.sketch)
    camera = _camera_from(args, sketch.size[0])
    if camera.size != sketch.size[0]:
        raise SketchMeshError(
            f"camera renders at {camera.size} but the sketch is {sketch.size[0]}"
        )
    if args.kind == "delete":
        if args.prev:
            erased = sketch_diff(load_png(args.prev), sketch).erased
        else:
            erased = sketch.edit_mask
        labels = geometric_labels(
            mesh, erased, camera, depth_test=args.depth_test
        )
        removed, kept = apply_deletion(mesh, labels)
        save_obj(kept, args.output)
        report = {"faces": kept.face_count, "removed_faces": removed.face_count}
    else:
        if not args.model:
            raise SketchMeshError("--model is required for add edits")
        model, speculator = load_tables(args.model)
        fragment, trace = generate_addition(
            model,
            codec.tokenize(mesh),
            speculator=speculator,
            condition=sketch,
            config=DecodeConfig(
                temperature=args.temperature,
                speculate=speculator is not None,
                seed=args.seed,
            ),
        )
        addition = codec.detokenize(codec.fragment_sequence(fragment, args.bins))
        out = merge(mesh, addition)
        save_obj(out, args.output)
        report = {
            "faces": out.face_count,
            "added_faces": addition.face_count,
            "model_passes": trace.model_passes,
        }
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_fit(args) -> int:
    rng = np.random.default_rng(args.seed)
    pairs = _training_pairs(args, rng)
    model = fit_counting_model(pairs, order=args.order, bins=args.bins)
    speculator = fit_counting_speculator(pairs, order=args.order, bins=args.bins)
    save_tables(args.out, model, speculator)
    print(
        json.dumps(
            {"sequences": len(pairs), "order": args.order, "out": str(args.out)},
            sort_keys=True,
        )
    )
    return 0


def cmd_bench(args) -> int:
    rng = np.random.default_rng(args.seed)
    pairs = _training_pairs(args, rng)
    model = fit_counting_model(pairs, order=args.order, bins=args.bins)
    speculator = fit_counting_speculator(pairs, order=args.order, bins=args.bins)
    prompts = [prompt for prompt, _ in pairs[: args.prompts]]
    report = bench_decode(
        model,
        speculator,
        prompts,
        delay_ms=args.delay_ms,
        max_tokens=args.tokens,
    )
    print(json.dumps(report, sort_keys=True))
    if args.figure:
        from .plots import bench_figure

        bench_figure(report, args.figure)
    return 0


def cmd_stats(args) -> int:
    mesh = _load_quantized(args.input, args.bins, args.normalize)
    stats = metrics.mesh_stats(mesh)
    print(json.dumps(stats, sort_keys=True))
    if args.figure:
        from .plots import stats_figure

        stats_figure(stats, args.figure)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import (
        CountingAdditionBackend,
        OracleAdditionBackend,
        SessionStore,
        create_app,
    )

    if args.backend == "oracle":
        if not args.oracle_mesh:
            raise SketchMeshError("--oracle-mesh is required for the oracle backend")
        addition = quantize(load_obj(args.oracle_mesh), args.bins)
        backend = OracleAdditionBackend(addition)
    elif args.model:
        model, speculator = load_tables(args.model)
        backend = CountingAdditionBackend(model, speculator)
    else:
        rng = np.random.default_rng(args.seed)
        pairs = corpus_pairs(
            [
                codec.tokenize(quantize(m, args.bins))
                for m in synthetic.demo_corpus(rng, bins=args.bins)
            ]
        )
        model = fit_counting_model(pairs, order=args.order, bins=args.bins)
        speculator = fit_counting_speculator(pairs, order=args.order, bins=args.bins)
        backend = CountingAdditionBackend(model, speculator)
    data_dir = args.data_dir or os.environ.get("SKETCHMESH_DATA_DIR")
    store = SessionStore(Path(data_dir) if data_dir else None)
    app = create_app(store, backend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchmesh", description="sketch-driven mesh editing toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--bins", type=int, default=DEFAULT_BINS)
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("tokenize", help="mesh file to token file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=("bin", "json"), default="bin")
    p.add_argument("--normalize", action="store_true",
                   help="rescale into the unit cube first (for raw meshes)")
    common(p, seed=False)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("detokenize", help="token file to mesh file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=("bin", "json"), default="bin")
    p.set_defaults(func=cmd_detokenize)

    p = sub.add_parser("datagen", help="synthesise edit samples from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--image-size", type=int, default=512)
    p.add_argument("--no-augment", action="store_true")
    common(p)
    p.set_defaults(func=cmd_datagen)

    p = sub.add_parser("sketch", help="render the sketch of a mesh")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--normalize", action="store_true")
    _camera_args(p)
    common(p, seed=False)
    p.set_defaults(func=cmd_sketch)

    p = sub.add_parser("edit", help="apply one sketch edit to a mesh")
    p.add_argument("--input", required=True)
    p.add_argument("--sketch", required=True)
    p.add_argument("--kind", choices=("add", "delete"), required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--prev", help="previous sketch; deletions erase the ink "
                   "that disappeared between it and --sketch")
    p.add_argument("--model", help="fitted tables (required for add)")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--depth-test", action="store_true")
    p.add_argument("--temperature", type=float, default=0.0)
    _camera_args(p)
    common(p)
    p.set_defaults(func=cmd_edit)

    p = sub.add_parser("fit", help="fit counting tables from meshes")
    p.add_argument("--corpus", help="directory of OBJ files")
    p.add_argument("--synthetic", type=int, default=12,
                   help="procedural corpus size when no --corpus is given")
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int, default=6)
    common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bench", help="time decoding, speculator on vs off")
    p.add_argument("--corpus")
    p.add_argument("--synthetic", type=int, default=12)
    p.add_argument("--order", type=int, default=6)
    p.add_argument("--prompts", type=int, default=3)
    p.add_argument("--tokens", type=int, default=300)
    p.add_argument("--delay-ms", type=float, default=1.0)
    p.add_argument("--figure", help="also render a throughput chart here")
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", help="mesh quality statistics")
    p.add_argument("--input", required=True)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--figure", help="also render a summary chart here")
    common(p, seed=False)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("serve", help="run the HTTP editing service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", help="session directory (or SKETCHMESH_DATA_DIR)")
    p.add_argument(
        "--backend",
        choices=("counting", "oracle"),
        default="counting",
        help="addition backend: counting tables or a fixed oracle mesh",
    )
    p.add_argument("--model", help="fitted tables for the counting backend")
    p.add_argument("--oracle-mesh", help="OBJ whose tokens the oracle backend always proposes")
    p.add_argument("--order", type=int, default=6)
    common(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SketchMeshError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
