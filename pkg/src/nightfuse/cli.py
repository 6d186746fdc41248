"""Command-line entry point.

    nightfuse run --ir-dir IR --vis-dir VIS --out-dir OUT [options]
    nightfuse gen-synthetic --out DIR [--seed N] [--scenario ...]

Exit status: 0 on success, 1 on a configuration/validation error, 2 on a
runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import synthetic
from .errors import ConfigError, NightfuseError, ParseError
from .pipeline import parse_config, run_pipeline

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def _rgb(text: str) -> list[int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected R,G,B")
    return [int(p) for p in parts]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nightfuse", description="Fuse pre-aligned IR and visible frame sequences.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run the fusion pipeline")
    run.add_argument("--ir-dir", required=True)
    run.add_argument("--vis-dir", required=True)
    run.add_argument("--out-dir", required=True)
    run.add_argument("--config", help="JSON file with any of the pipeline keys")
    run.add_argument("--frame-rate", type=float, help="source frame rate; sets the default stride")
    run.add_argument("--stride", type=int)
    run.add_argument("--median-kernel", type=int)
    run.add_argument("--background-frames", help="count, or 'all'")
    run.add_argument("--threshold", type=int)
    run.add_argument("--polarity", choices=["positive", "absolute"])
    run.add_argument("--area-min", type=int)
    run.add_argument("--ratio-min", type=float)
    run.add_argument("--ratio-max", type=float)
    run.add_argument("--connectivity", type=int, choices=[4, 8])
    run.add_argument("--open-radius", type=int)
    run.add_argument("--boost", type=int)
    run.add_argument("--box-color", type=_rgb)
    run.add_argument("--box-thickness", type=int)
    run.add_argument("--no-boxes", dest="draw_boxes", action="store_false", default=None)
    run.add_argument("--emit-masks", action="store_true", default=None)
    run.add_argument("--emit-background", action="store_true", default=None)
    run.add_argument("--workers", type=int)
    run.add_argument("--output-format", choices=["ppm", "png"])

    gen = sub.add_parser("gen-synthetic", help="write a seeded synthetic IR/visible scene")
    gen.add_argument("--out", required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--scenario", choices=["walking", "noisy", "dataset"], default="walking")
    gen.add_argument("--frames", type=int)
    gen.add_argument("--width", type=int, default=320)
    gen.add_argument("--height", type=int, default=240)
    gen.add_argument("--format", choices=["pnm", "png"], default="pnm")
    return parser


def _cmd_run(args) -> int:
    bg_frames = args.background_frames
    if bg_frames is not None and bg_frames != "all":
        try:
            bg_frames = int(bg_frames)
        except ValueError:
            raise ParseError(f"--background-frames must be an integer or 'all', got {bg_frames!r}") from None
    config = parse_config(
        args.config,
        ir_dir=args.ir_dir,
        vis_dir=args.vis_dir,
        out_dir=args.out_dir,
        frame_rate=args.frame_rate,
        stride=args.stride,
        median_kernel=args.median_kernel,
        background_frames=bg_frames,
        threshold=args.threshold,
        polarity=args.polarity,
        area_min=args.area_min,
        ratio_min=args.ratio_min,
        ratio_max=args.ratio_max,
        connectivity=args.connectivity,
        open_radius=args.open_radius,
        boost=args.boost,
        box_color=args.box_color,
        box_thickness=args.box_thickness,
        draw_boxes=args.draw_boxes,
        emit_masks=args.emit_masks,
        emit_background=args.emit_background,
        workers=args.workers,
        output_format=args.output_format,
    )
    report = run_pipeline(config)
    print(
        json.dumps(
            {
                "frames_processed": report.frames_processed,
                "achieved_fps": round(report.achieved_fps, 2),
                "detect_fuse_fps": round(report.detect_fuse_fps, 2),
                "out_dir": str(config.out_dir),
            }
        )
    )
    return EXIT_OK


def _cmd_gen(args) -> int:
    kwargs = dict(seed=args.seed, width=args.width, height=args.height)
    if args.scenario == "dataset":
        scene = synthetic.paired_dataset(n_frames=args.frames or synthetic.DATASET_FRAMES, **kwargs)
    else:
        noisy = args.scenario == "noisy"
        scene = synthetic.walking_block_scene(
            n_frames=args.frames or 40, n_specks=10 if noisy else 0, bar=noisy, **kwargs
        )
        scene.meta["scenario"] = args.scenario
    out = synthetic.write_scene(scene, args.out, image_format=args.format)
    print(f"wrote {len(scene)} frame pairs to {out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ParseError as exc:
        print(f"nightfuse: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_gen(args)
    except ConfigError as exc:
        print(f"nightfuse: configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NightfuseError, OSError, ValueError) as exc:
        print(f"nightfuse: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
