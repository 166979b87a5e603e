"""Command-line entry point: ``frontline {frame,ghost,series,chart,influence}``."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from .core import FrontlineError, Timeline, parse_timeline, parse_weight_map, read_text, serialize_grid
from .field import CLIP_POLICIES
from .kernels import SCALE, KernelSpec
from .render import RenderStyle, render_area_chart, render_frame, render_ghost
from .timeline import (FrontlineConfig, WeightMode, process_frame, process_timeline,
                       series_from_results)

SUBCOMMANDS = ("frame", "ghost", "series", "chart", "influence")
KERNEL_FLAGS = {"rbf": "rbf", "poly": "polynomial", "linear": "linear"}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_float(name):
    def conv(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number") from None
        if not (math.isfinite(v) and v > 0):
            raise argparse.ArgumentTypeError(f"{name} must be positive")
        return v
    return conv


def _gamma(text):
    if text == SCALE:
        return SCALE
    return _positive_float("gamma")(text)


def _levels(text):
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError("levels must be comma-separated numbers") from None
    if not vals or any(not v > 0 for v in vals):
        raise argparse.ArgumentTypeError("levels must be positive")
    return vals


def _grid(text):
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError("grid must look like <nx>x<ny>") from None
    if nx < 2 or ny < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 nodes per axis")
    return nx, ny


def _samples(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("area samples must be an integer") from None
    if n <= 0 or math.isqrt(n) ** 2 != n:
        raise argparse.ArgumentTypeError(f"area samples {n} is not a perfect square")
    return n


def _weight(text):
    if text in ("uniform", "health"):
        return (text, None)
    for prefix, kind in (("map=", "map_lookup"), ("kernel-map=", "kernel_map")):
        if text.startswith(prefix):
            path = text[len(prefix):]
            if not path:
                raise argparse.ArgumentTypeError(f"{prefix} needs a map path")
            return (kind, path)
    if text in ("map", "kernel-map"):
        raise argparse.ArgumentTypeError(f"weight mode {text} needs a map path ({text}=<path>)")
    raise argparse.ArgumentTypeError(f"unknown weight mode {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="frontline", description="SVM frontlines and map control from telemetry.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--in", dest="input", required=True, help="telemetry file")
    p.add_argument("--out", default="frontline", help="output prefix")
    p.add_argument("--ext", default="svgx", help="extension for vector-graphic outputs")
    p.add_argument("--kernel", choices=sorted(KERNEL_FLAGS), default="rbf")
    p.add_argument("--gamma", type=_gamma, default=SCALE)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--coef0", type=float, default=0.0)
    p.add_argument("--c", type=_positive_float("C"), default=10.0)
    p.add_argument("--levels", type=_levels, default=(0.75,))
    p.add_argument("--weight", type=_weight, default=("uniform", None))
    p.add_argument("--clip", choices=CLIP_POLICIES, default="distance")
    p.add_argument("--clip-threshold", type=_positive_float("clip threshold"), default=2.0)
    p.add_argument("--grid", type=_grid, default=(256, 256))
    p.add_argument("--area-samples", type=_samples, default=1024)
    p.add_argument("--interval", type=_positive_float("interval"), default=2.0)
    p.add_argument("--at", type=float, default=None, help="frame time (frame/influence)")
    p.add_argument("--window", type=int, default=1, help="key-moment window in frames")
    p.add_argument("--ovr", action="store_true", help="one-vs-rest for more than two teams")
    p.add_argument("--influence-ramp", action="store_true", help="draw the decision field")
    p.add_argument("--background", default=None, help="background image href")
    p.add_argument("--canvas", type=_grid, default=(800, 800), help="<w>x<h> pixels")
    p.add_argument("--workers", type=int, default=1)
    return p


def _config(args) -> FrontlineConfig:
    if args.degree < 1:
        raise UsageError("degree must be a positive integer")
    if args.window < 1:
        raise UsageError("window must be at least 1")
    kind, map_path = args.weight
    wmap = None
    if map_path is not None:
        try:
            wmap = parse_weight_map(read_text(map_path))
        except OSError as exc:
            raise UsageError(f"cannot read weight map: {exc}") from None
        except FrontlineError as exc:
            raise DataError(f"{map_path}: {exc}") from None
    kernel = KernelSpec(KERNEL_FLAGS[args.kernel], args.gamma, args.degree, args.coef0)
    if kind == "kernel_map" and kernel.kind != "rbf":
        raise UsageError("kernel-map weighting requires --kernel rbf")
    return FrontlineConfig(kernel=kernel, C=args.c, levels=args.levels, clip=args.clip,
                           clip_threshold=args.clip_threshold, grid=args.grid,
                           area_samples=args.area_samples, weights=WeightMode(kind, wmap),
                           ovr=args.ovr)


def _nearest_frame(timeline: Timeline, at: Optional[float]):
    frames = timeline.frames
    if at is None:
        return frames[0]
    return min(frames, key=lambda fr: (abs(fr.t - at), fr.t))


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(path)


def _run(args) -> None:
    try:
        config = _config(args)
        style = RenderStyle(canvas_px=args.canvas, show_influence=args.influence_ramp)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        text = read_text(args.input)
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from None
    try:
        timeline = parse_timeline(text)
    except FrontlineError as exc:
        raise DataError(f"{args.input}: {exc}") from None
    if not timeline.frames:
        raise DataError(f"{args.input}: no frames")
    prefix, ext = args.out, args.ext.lstrip(".")
    bounds = timeline.map_bounds

    if args.subcommand in ("frame", "influence"):
        frame = _nearest_frame(timeline, args.at)
        fr = process_frame(frame, config, bounds)
        if not fr.ok:
            raise DataError(f"t={fr.t:g}: {fr.reason}")
        if args.subcommand == "frame":
            _write(Path(f"{prefix}_frame_{fr.t:g}.{ext}"), render_frame(fr, style, args.background))
        else:
            if fr.frontlines is None:
                raise DataError(f"t={fr.t:g}: influence export needs a two-team frame")
            _write(Path(f"{prefix}_influence_{fr.t:g}.grid"), serialize_grid(fr.frontlines.field))
        return

    results = process_timeline(timeline, config, workers=args.workers)
    for r in results:
        if not r.ok:
            print(f"t={r.t:g}: no frontline ({r.reason})", file=sys.stderr)
    if args.subcommand == "ghost":
        if not any(r.ok for r in results):
            raise DataError("no frame has a frontline")
        _write(Path(f"{prefix}_ghost.{ext}"),
               render_ghost(results, args.interval, style, args.background))
        return
    series = series_from_results(results, args.window)
    if args.subcommand == "series":
        _write(Path(f"{prefix}_series.csv"), series.to_text())
    else:
        if not series.entries:
            raise DataError("no two-team frames to chart")
        _write(Path(f"{prefix}_area.{ext}"), render_area_chart(series, style))


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _run(args)
    except UsageError as exc:
        print(f"frontline: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"frontline: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
