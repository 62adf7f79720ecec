"""Command-line interface: render to files, benchmark, or serve over WebSocket."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .camera import Camera, frame_bounds
from .geometry import DatasetFormatError, generate_synthetic_bundle, load_dataset
from .runtime.bench import benchmark_run
from .runtime.engine import (DEFAULT_BACKGROUND, DEFAULT_BASE_COLOR, Engine,
                             EngineConfig, EngineError)
from .runtime.export import write_depth, write_ppm
from .runtime.report import render_bench_figures, write_bench_table
from .runtime.serve import run_server
from .stylemap import NEAR_MAX, NEAR_MIN, MappingSpec, VARIABLES

logger = logging.getLogger(__name__)


def _floats(text: str, n: int, name: str) -> tuple[float, ...]:
    parts = text.split(",")
    if len(parts) != n:
        raise argparse.ArgumentTypeError(f"{name} needs {n} comma-separated values")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{name}: not a number in {text!r}") from None


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like 1024x768, got {text!r}") from None


def _parse_synthetic(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("synthetic spec is COUNT,VERTICES,SEED")
    try:
        return int(parts[0]), int(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"synthetic spec must be integers: {text!r}") from None


def _parse_map(text: str) -> frozenset:
    if text.strip().lower() == "none":
        return frozenset()
    names = [p.strip() for p in text.split(",") if p.strip()]
    for name in names:
        if name not in VARIABLES:
            raise argparse.ArgumentTypeError(
                f"unknown visual variable {name!r}; choose from {', '.join(VARIABLES)} or none")
    return frozenset(names)


def _add_scene_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dataset", metavar="PATH", help="polyline dataset file")
    src.add_argument("--synthetic", metavar="COUNT,VERTS,SEED", type=_parse_synthetic,
                     help="generate a synthetic tube bundle instead of loading a file")
    p.add_argument("--camera", metavar="9xFLOAT",
                   type=lambda s: _floats(s, 9, "--camera"),
                   help="position,focal,up as 9 comma-separated floats (default: auto-frame)")
    p.add_argument("--fov", type=float, default=30.0, help="vertical field of view, degrees")
    p.add_argument("--size", type=_parse_size, default=(1024, 768), metavar="WxH",
                   help="viewport size (default 1024x768)")
    p.add_argument("--map", type=_parse_map, default=frozenset({"color"}),
                   metavar="VARS", help="visual variables to map: comma list of "
                   "size,color,value,alpha, or none (default color)")
    p.add_argument("--radius", type=lambda s: _floats(s, 2, "--radius"),
                   default=(0.002, 0.008), metavar="MIN,MAX", help="tube radius range")
    p.add_argument("--near-color", type=lambda s: _floats(s, 3, "--near-color"),
                   default=(0.95, 0.42, 0.12), metavar="R,G,B")
    p.add_argument("--far-color", type=lambda s: _floats(s, 3, "--far-color"),
                   default=(0.10, 0.22, 0.80), metavar="R,G,B")
    p.add_argument("--value-range", type=lambda s: _floats(s, 2, "--value-range"),
                   default=(0.25, 1.0), metavar="MIN,MAX")
    p.add_argument("--alpha-range", type=lambda s: _floats(s, 2, "--alpha-range"),
                   default=(0.15, 1.0), metavar="MIN,MAX")
    p.add_argument("--orientation", choices=[NEAR_MAX, NEAR_MIN], default=NEAR_MAX)
    p.add_argument("--tube-sides", type=int, default=6, metavar="N",
                   help="cross-section sides (default 6)")
    p.add_argument("--workers", type=int, default=1, metavar="P",
                   help="parallel worker processes (default 1)")
    p.add_argument("--base-color", type=lambda s: _floats(s, 3, "--base-color"),
                   default=DEFAULT_BASE_COLOR, metavar="R,G,B",
                   help="tube color when the color mapping is disabled")
    p.add_argument("--background", type=lambda s: _floats(s, 4, "--background"),
                   default=DEFAULT_BACKGROUND, metavar="R,G,B,A",
                   help="background color, 8-bit channels")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depthtubes",
        description="Depth-stylized dense tube rendering on CPU workers.")
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    render = sub.add_parser("render", help="render one frame to image files")
    _add_scene_args(render)
    render.add_argument("--out", default="out.ppm", metavar="PATH",
                        help="output image, binary PPM (default out.ppm)")
    render.add_argument("--depth-out", metavar="PATH",
                        help="also dump the float32 depth plane")

    bench = sub.add_parser("bench", help="time frames across worker counts")
    _add_scene_args(bench)
    bench.add_argument("--worker-counts", default="1,2,4", metavar="CSV",
                       help="worker counts to sample (default 1,2,4)")
    bench.add_argument("--frames", type=int, default=30, metavar="N",
                       help="timed frames per sample (default 30)")
    bench.add_argument("--out", metavar="DIR",
                       help="also write bench.tsv and figures into this directory")

    serve = sub.add_parser("serve", help="serve frames over WebSocket")
    _add_scene_args(serve)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8765)

    return parser


def _load_scene(args):
    if args.dataset is not None:
        dataset = load_dataset(args.dataset)
    else:
        count, verts, seed = args.synthetic
        dataset = generate_synthetic_bundle(count, verts, seed)
    if args.camera is not None:
        v = args.camera
        cam = Camera(position=np.array(v[0:3]), focal=np.array(v[3:6]),
                     up=np.array(v[6:9]), fov_y=args.fov, viewport=args.size)
    else:
        cam = frame_bounds(dataset.bounds, args.fov, args.size)
    spec = MappingSpec(
        enabled=args.map,
        radius_range=args.radius,
        near_color=args.near_color,
        far_color=args.far_color,
        value_range=args.value_range,
        alpha_range=args.alpha_range,
        orientation=args.orientation,
    )
    background = tuple(int(c) for c in args.background)
    config = EngineConfig(workers=args.workers, sides=args.tube_sides,
                          base_color=args.base_color, background=background)
    return dataset, cam, spec, config


def _cmd_render(args) -> int:
    dataset, cam, spec, config = _load_scene(args)
    with Engine(dataset, cam, spec, config) as engine:
        tile, stats = engine.render_frame()
    write_ppm(tile, args.out)
    print(f"wrote {args.out}: {stats.width}x{stats.height}, "
          f"{stats.frame_ms:.1f} ms ({stats.sort_ms:.1f} ms sorting, "
          f"{stats.sort_rounds} rounds, {stats.workers} workers)")
    if args.depth_out:
        write_depth(tile, args.depth_out)
        print(f"wrote {args.depth_out}")
    return 0


def _cmd_bench(args) -> int:
    dataset, cam, spec, config = _load_scene(args)
    try:
        counts = [int(p) for p in args.worker_counts.split(",") if p.strip()]
    except ValueError:
        print(f"bad --worker-counts: {args.worker_counts!r}", file=sys.stderr)
        return 2
    records = benchmark_run(dataset, cam, spec, counts, args.frames, config)
    write_bench_table(records, sys.stdout)
    if args.out:
        import os
        os.makedirs(args.out, exist_ok=True)
        table = os.path.join(args.out, "bench.tsv")
        with open(table, "w") as fh:
            write_bench_table(records, fh)
        written = render_bench_figures(records, args.out)
        print(f"wrote {table} and {len(written)} figures to {args.out}", file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    dataset, cam, spec, config = _load_scene(args)
    with Engine(dataset, cam, spec, config) as engine:
        run_server(engine, args.host, args.port)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "render":
            return _cmd_render(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except (DatasetFormatError, FileNotFoundError, ValueError, EngineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
