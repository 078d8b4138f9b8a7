"""Command-line front end: filter, compare, bench."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .experiments import (BENCH_CSV_HEADER, bench_record_csv, rotation_invariance,
                          run_benchmark)
from .kernels import ShapeSpec
from .netpbm import read_image, write_image
from .oracle import reference_filter
from .tiling import FilterParams, filter_image


def parse_shape(text: str, radius: int) -> ShapeSpec:
    if text == "circle":
        return ShapeSpec("circle", radius)
    if text == "square":
        return ShapeSpec("square", radius)
    if text.startswith("poly:"):
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"bad shape {text!r}; want poly:SIDES[:ROTATION]")
        sides = int(parts[1])
        rotation = float(parts[2]) if len(parts) == 3 else 0.0
        return ShapeSpec("regular_polygon", radius, sides=sides,
                         rotation_deg=rotation)
    raise ValueError(f"bad shape {text!r}; want circle, square, or poly:K[:ROT]")


def _filter_params(args, percentile) -> FilterParams:
    return FilterParams(
        shape=parse_shape(args.shape, args.radius),
        percentile=percentile,
        boundary=args.boundary,
        forwarding=not args.no_forwarding,
        tile_size=args.tile,
        workers=args.threads,
    )


def cmd_filter(args) -> int:
    image = read_image(args.input)
    if args.percentile_map is not None:
        pmap = read_image(args.percentile_map)
        if pmap.ndim != 2:
            raise ValueError("percentile map must be grayscale")
        if pmap.shape != image.shape[:2]:
            raise ValueError("percentile map dimensions must match the input")
        percentile = np.clip(pmap.astype(np.float64), 0.0, 100.0) / 100.0
        if args.boundary == "valid":
            r = args.radius
            percentile = percentile[r:pmap.shape[0] - r, r:pmap.shape[1] - r]
    else:
        if not 0.0 <= args.percentile <= 100.0:
            raise ValueError("percentile must be in [0, 100]")
        percentile = args.percentile / 100.0
    params = _filter_params(args, percentile)
    engine = filter_image if args.engine == "fast" else reference_filter
    write_image(args.output, engine(image, params))
    return 0


def cmd_compare(args) -> int:
    image = read_image(args.input)
    circle, square, ratio = rotation_invariance(
        image, args.radius, angle_deg=args.angle,
        interpolation_order=3 if args.bicubic else 1)
    print("kernel,std_dev")
    for res in (circle, square):
        print(f"{res.kernel},{res.std_dev:.6g}")
    print(f"ratio,{ratio:.6g}")
    if args.out_prefix:
        for res in (circle, square):
            write_image(f"{args.out_prefix}-{res.kernel}-diff.pfm",
                        res.difference.astype(np.float32))
    return 0


def cmd_bench(args) -> int:
    image = read_image(args.input)
    if image.ndim == 3:
        image = image[:, :, 0]
    radii = [int(r) for r in args.radii.split(",")]
    records = run_benchmark(image, radii, engine=args.engine,
                            repeats=args.repeats, workers=args.threads)
    print(BENCH_CSV_HEADER)
    for rec in records:
        print(bench_record_csv(rec))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isomedian",
        description="Exact median/percentile filtering with circular kernels")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="filter an image")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--percentile", type=float, default=50.0,
                   help="selection percentile, 0..100 (default 50)")
    p.add_argument("--percentile-map", default=None,
                   help="grayscale image of per-pixel percentiles, 0..100")
    p.add_argument("--shape", default="circle",
                   help="circle, square, or poly:SIDES[:ROTATION]")
    p.add_argument("--boundary", choices=["replicate", "valid"],
                   default="replicate")
    p.add_argument("--tile", type=int, default=None,
                   help="output tile size override")
    p.add_argument("--no-forwarding", action="store_true")
    p.add_argument("--engine", choices=["fast", "oracle"], default="fast")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("compare",
                       help="rotational-invariance comparison, circle vs square")
    p.add_argument("input")
    p.add_argument("--radius", type=int, default=16)
    p.add_argument("--angle", type=float, default=22.5)
    p.add_argument("--bicubic", action="store_true",
                   help="use bicubic instead of bilinear resampling")
    p.add_argument("--out-prefix", default=None,
                   help="write difference images as PREFIX-{kernel}-diff.pfm")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="wall-time an engine over a radius sweep")
    p.add_argument("input")
    p.add_argument("--radii", default="2,4,8,16,32,48,64,96")
    p.add_argument("--engine", choices=["fast", "oracle"], default="fast")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"isomedian: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
