"""``lanetune`` command line: process, eval, synth, dump-config."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from . import io
from .config import ConfigError, config_to_dict, dump_config, load_config
from .evaluation import (
    MATCH_THRESHOLD,
    PX_THRESHOLD,
    JoinError,
    LaneFormatError,
    evaluate_clip,
    read_lane_file,
    write_lane_file,
)
from .pipeline import ChannelSpec, iter_clip
from .synth import SceneSpec, frame_name, generate_clip

STAGES = ("denoise", "canny", "roi", "hough", "tune", "channels", "total")


class CLIError(RuntimeError):
    pass


def _flag_overrides(args) -> list[dict]:
    """Dedicated flags, applied after ``--set`` so they win."""
    out = []
    if getattr(args, "initial_threshold", None) is not None:
        out.append({"canny": {"initial_threshold": args.initial_threshold}})
    if getattr(args, "channels", None) is not None:
        try:
            planes = ChannelSpec.parse(args.channels).planes
        except ValueError as exc:
            raise CLIError(f"--channels: {exc}") from exc
        out.append({"output": {"channels": list(planes)}})
    if getattr(args, "output_edges", None) is not None:
        out.append({"output": {"edges": args.output_edges}})
    if getattr(args, "kernel_size", None) is not None:
        out.append({"bilateral": {"kernel_size": args.kernel_size}})
    if getattr(args, "sigma_spatial", None) is not None:
        out.append({"bilateral": {"sigma_spatial": args.sigma_spatial}})
    if getattr(args, "sigma_intensity", None) is not None:
        out.append({"bilateral": {"sigma_intensity": args.sigma_intensity}})
    return out


def _effective_config(args):
    try:
        return load_config(args.config, [*args.set, *_flag_overrides(args)])
    except (OSError, yaml.YAMLError) as exc:
        raise CLIError(f"config: {exc}") from exc


def _trace_line(trace, with_timings: bool) -> str:
    d = trace.to_dict()
    if not with_timings:
        d.pop("stage_ms")
    return io.dumps_fixed(d)


def _run_clip(paths, out_dir: Path, config, with_timings: bool) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    names = [p.stem + ".png" for p in paths]
    if len(set(names)) != len(names):
        dup = sorted({n for n in names if names.count(n) > 1})
        raise CLIError(f"output names collide: {', '.join(dup)}")

    timings = {k: [] for k in STAGES}
    last = None
    with open(out_dir / "trace.jsonl", "w", encoding="utf-8") as trace_fh, \
            open(out_dir / "timings.jsonl", "w", encoding="utf-8") as time_fh:
        try:
            for name, (out, trace) in zip(names, iter_clip(io.iter_frames(paths), config)):
                io.write_frame(out_dir / name, out)
                trace_fh.write(_trace_line(trace, with_timings) + "\n")
                time_fh.write(io.dumps_fixed({"frame_index": trace.frame_index, "stage_ms": trace.stage_ms}) + "\n")
                for k in STAGES:
                    timings[k].append(trace.stage_ms[k])
                last = trace
        except io.FrameError as exc:
            raise CLIError(str(exc)) from exc
        except ValueError as exc:
            raise CLIError(f"{out_dir.name}: {exc}") from exc

    final = config.initial_threshold if last is None else min(
        max(last.th_high_used + last.delta_applied, config.th_min), config.th_max
    )
    summary = {
        "frame_count": len(timings["total"]),
        "final_threshold": final,
        "last_line_count": last.line_count if last else 0,
        "mean_stage_ms": {k: float(np.mean(v)) for k, v in timings.items()},
        "max_stage_ms": {k: float(np.max(v)) for k, v in timings.items()},
    }
    (out_dir / "summary.json").write_text(io.dumps_fixed(summary) + "\n", encoding="utf-8")
    return summary


def cmd_process(args) -> int:
    config = _effective_config(args)
    if args.dump_config:
        sys.stdout.write(dump_config(config))
        return 0
    if args.output is None:
        raise CLIError("process needs -o/--output")

    clips = []
    for src in args.inputs:
        try:
            found = io.discover_clips(src)
        except io.FrameError as exc:
            raise CLIError(str(exc)) from exc
        if not found or not any(paths for _, paths in found):
            raise CLIError(f"no frames found in {src}")
        clips.extend(found)
    clip_names = [name for name, _ in clips]
    if len(set(clip_names)) != len(clip_names):
        raise CLIError(f"clip names collide: {', '.join(clip_names)}")

    out_root = Path(args.output)
    out_root.mkdir(parents=True, exist_ok=True)
    (out_root / "config.yaml").write_text(dump_config(config), encoding="utf-8")
    single = len(clips) == 1
    for name, paths in clips:
        summary = _run_clip(paths, out_root if single else out_root / name, config, args.trace_timings)
        if not args.quiet:
            print(
                f"{name}: {summary['frame_count']} frames, "
                f"mean {summary['mean_stage_ms']['total']:.1f} ms/frame, "
                f"final th_high {summary['final_threshold']:.3f}",
                file=sys.stderr,
            )
    return 0


def cmd_eval(args) -> int:
    try:
        preds = read_lane_file(args.pred)
        gts = read_lane_file(args.gt)
        scores = evaluate_clip(preds, gts, args.px_threshold, args.match_threshold)
    except OSError as exc:
        raise CLIError(str(exc)) from exc
    except JoinError as exc:
        raise CLIError(f"join failed: {exc}") from exc
    except LaneFormatError as exc:
        raise CLIError(f"parse failed: {exc}") from exc
    print(json.dumps(scores._asdict(), separators=(",", ":")))
    return 0


def cmd_synth(args) -> int:
    data = {}
    if args.spec is not None:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                data = yaml.safe_load(fh) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise CLIError(f"scene spec: {exc}") from exc
        if not isinstance(data, dict):
            raise CLIError("scene spec: top level must be a mapping")
    if args.seed is not None:
        data["seed"] = args.seed
    try:
        spec = SceneSpec.from_dict(data)
        frames, truth = generate_clip(spec, args.frames)
    except (TypeError, ValueError) as exc:
        raise CLIError(f"invalid scene spec: {exc}") from exc
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames):
        io.write_frame(out / frame_name(i), frame)
    write_lane_file(out / "ground_truth.json", truth)
    return 0


def cmd_dump_config(args) -> int:
    config = _effective_config(args)
    if args.json:
        print(json.dumps(config_to_dict(config), default=str))
    else:
        sys.stdout.write(dump_config(config))
    return 0


def _add_config_args(p):
    p.add_argument("--config", "-c", help="YAML config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key, e.g. --set hough.vote_threshold=5 (repeatable)")
    p.add_argument("--initial-threshold", type=float, help="starting Canny high threshold")
    p.add_argument("--channels", help="output plane sources as blue,green,red, e.g. edge,green,edge")
    p.add_argument("--output-edges", choices=("full", "roi"), help="edge map written to the output frame")
    p.add_argument("--kernel-size", type=int, help="bilateral window side")
    p.add_argument("--sigma-spatial", type=float)
    p.add_argument("--sigma-intensity", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lanetune", description="Adaptive lane-frame preprocessing.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="preprocess one or more frame clips")
    p.add_argument("inputs", nargs="*", help="frame directory, directory of clip directories, or list file")
    p.add_argument("-o", "--output", help="output directory")
    _add_config_args(p)
    p.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    p.add_argument("--trace-timings", action="store_true",
                   help="also put stage_ms in trace.jsonl (makes traces run-dependent)")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("eval", help="score lane predictions against ground truth")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("--px-threshold", type=float, default=PX_THRESHOLD)
    p.add_argument("--match-threshold", type=float, default=MATCH_THRESHOLD)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="render a synthetic road clip with ground truth")
    p.add_argument("spec", nargs="?", help="YAML scene spec (all fields optional)")
    p.add_argument("-n", "--frames", type=int, default=10)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dump-config", help="print the effective config")
    _add_config_args(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_dump_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "process" and not args.dump_config and not args.inputs:
        parser.error("process needs at least one input")
    try:
        return args.func(args)
    except (CLIError, ConfigError) as exc:
        print(f"lanetune: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
