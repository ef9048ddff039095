"""Command-line interface: ``mobility-map {process,synth,bench,grid,project}``.

Exit codes: 0 success, 2 invalid parameters, 3 unreadable input, 4 a pipeline
stage failed.
"""

import argparse
import dataclasses
import json
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .config import PipelineConfig, load_config, parse_overrides
from .errors import InputError, MobilityMapError, ParameterError, StageError
from .mobility import MobilityRegressor, mobility_grid
from .pipeline import STAGES, run_pipeline
from .projection import blank_image, render_overlay
from .synth import PRESETS, generate, preset

EXIT_OK = 0
EXIT_PARAMETER = 2
EXIT_INPUT = 3
EXIT_STAGE = 4


def _add_config_flags(parser):
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration value (repeatable)")
    group = parser.add_argument_group("configuration overrides (take precedence over --config)")
    for f in dataclasses.fields(PipelineConfig):
        group.add_argument("--" + f.name.replace("_", "-"), dest="cfg_" + f.name, type=f.type,
                           default=None, metavar=f.type.__name__.upper(),
                           help=f"default {f.default!r}")


def _config_from_args(args):
    overrides = parse_overrides(args.set)
    for name in PipelineConfig.field_names():
        value = getattr(args, "cfg_" + name)
        if value is not None:
            overrides[name] = value
    return load_config(args.config, overrides)


def _write_json(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_scored_ply(path, result):
    scores = result.point_scores()
    io.write_ply(path, result.cloud.with_colors(result.score_colors()),
                 scalars={"segment": result.labels, "score": scores})


def cmd_process(args):
    cfg = _config_from_args(args)
    cloud = io.read_cloud(args.input)
    if len(cloud) == 0:
        raise InputError(f"{args.input}: the cloud has no valid points")
    result = run_pipeline(cloud, cfg)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    _write_json(out / f"{stem}.report.json", result.report(include_timings=args.include_timings))
    _write_scored_ply(out / f"{stem}.scored.ply", result)
    if args.timings:
        _write_json(args.timings, {name: round(result.timings.get(name, 0.0) * 1000.0, 3)
                                   for name in STAGES})
    if args.overlay:
        image = io.read_image(args.image) if args.image else None
        io.write_ppm(args.overlay, result.overlay(image))
    n_seg = sum(1 for e in result.map.entries if e.status == "scored")
    print(f"{len(cloud)} points -> {len(result.cloud)} reduced, ground {len(result.ground.ground)}, "
          f"{n_seg} scored segments; wrote {out}")
    return EXIT_OK


def _scene_from_args(args):
    spec = preset(args.preset)
    changes = {}
    for name in ("seed", "noise", "density", "outliers", "n_points"):
        value = getattr(args, name)
        if value is not None:
            changes[name] = value
    return dataclasses.replace(spec, **changes) if changes else spec


def cmd_synth(args):
    scene = generate(_scene_from_args(args))
    io.write_cloud(args.output, scene.cloud)
    labels = args.labels or str(Path(args.output).with_suffix(".labels.csv"))
    io.write_labels_csv(labels, scene.labels)
    names = ", ".join(f"{s.label}={s.name}" for s in scene.surfaces)
    print(f"wrote {len(scene.cloud)} points to {args.output} and labels to {labels} ({names})")
    return EXIT_OK


def cmd_bench(args):
    cfg = _config_from_args(args)
    if args.input:
        cloud = io.read_cloud(args.input)
    else:
        cloud = generate(_scene_from_args(args)).cloud
    if args.repetitions < 1:
        raise ParameterError("repetitions must be >= 1")
    # one untimed run compiles the numba kernels
    if not args.no_warmup:
        run_pipeline(cloud, cfg)
    runs = []
    totals = []
    for _ in range(args.repetitions):
        start = time.perf_counter()
        result = run_pipeline(cloud, cfg)
        totals.append(time.perf_counter() - start)
        runs.append(result)
    rows = []
    for name in STAGES:
        ms = statistics.median(r.timings[name] for r in runs) * 1000.0
        rows.append({"name": name, "time_ms": round(ms, 3), "points": runs[0].points[name]})
    total = statistics.median(totals) * 1000.0
    width = max(len(s) for s in STAGES)
    print(f"{'Step':<{width}}  {'Time(ms)':>10}  {'Points processed':>16}")
    for row in rows:
        print(f"{row['name']:<{width}}  {row['time_ms']:>10.3f}  {row['points']:>16d}")
    print(f"{'Total:':<{width}}  {total:>10.3f}")
    if args.json:
        _write_json(args.json, {"repetitions": args.repetitions, "stages": rows,
                                "total_ms": round(total, 3)})
    return EXIT_OK


def _steps(lo, hi, step, name):
    if step <= 0 or hi < lo:
        raise ParameterError(f"{name}: need step > 0 and max >= min")
    count = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, lo + (count - 1) * step, count)


def cmd_grid(args):
    cfg = _config_from_args(args)
    model = MobilityRegressor(cfg.sigma_f, cfg.length_scale, cfg.sigma_n).fit()
    slopes = _steps(args.slope_min, args.slope_max, args.slope_step, "slope")
    rough = _steps(args.roughness_min, args.roughness_max, args.roughness_step, "roughness")
    grid = mobility_grid(model, slopes, rough)
    lines = ["slope,roughness,score"]
    lines += [f"{s!r},{r!r},{m!r}" for s, r, m in grid.tolist()]
    text = "\n".join(lines) + "\n"
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
        print(f"wrote {len(grid)} rows to {args.output}")
    return EXIT_OK


def cmd_project(args):
    cfg = _config_from_args(args)
    props = io.read_ply_vertices(args.input)
    if "score" not in props:
        raise InputError(f"{args.input}: no per-vertex 'score' property (use a scored PLY)")
    points = np.column_stack([props[a] for a in "xyz"])
    image = io.read_image(args.image) if args.image else blank_image(cfg.camera)
    io.write_ppm(args.output, render_overlay(image, points, props["score"], cfg.camera))
    print(f"wrote overlay of {len(points)} points to {args.output}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mobility-map",
        description="Segment indoor point clouds and score every segment for legged-robot mobility.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="run the full pipeline on a PCD/PLY cloud")
    p.add_argument("input", help="input cloud (.pcd or .ply), sensor frame, meters")
    p.add_argument("-o", "--output-dir", default=".", help="directory for report and scored PLY")
    p.add_argument("--overlay", help="write a PPM overlay of the scores")
    p.add_argument("--image", help="RGB image (PPM, or PNG with Pillow) under the overlay")
    p.add_argument("--timings", help="write per-stage timings (ms) as JSON to this path")
    p.add_argument("--include-timings", action="store_true",
                   help="also put timings in the report (the report is then not reproducible)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_process)

    def scene_flags(q, default, seed_flag="--seed"):
        q.add_argument("--preset", default=default, choices=sorted(PRESETS))
        q.add_argument(seed_flag, dest="seed", type=int, help="scene RNG seed")
        q.add_argument("--noise", type=float, help="noise std along the surface normal (m)")
        q.add_argument("--density", type=float, help="points per square meter")
        q.add_argument("--outliers", type=int)
        q.add_argument("--n-points", type=int, help="exact total point count")

    p = sub.add_parser("synth", help="generate a labelled synthetic scene")
    scene_flags(p, "corridor")
    p.add_argument("-o", "--output", required=True, help="output cloud (.pcd or .ply)")
    p.add_argument("--labels", help="labels CSV (default: <output>.labels.csv)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="time every pipeline stage")
    scene_flags(p, "bench", seed_flag="--scene-seed")
    p.add_argument("--input", help="time this cloud instead of a synthetic scene")
    p.add_argument("-r", "--repetitions", type=int, default=3)
    p.add_argument("--no-warmup", action="store_true", help="skip the untimed compile run")
    p.add_argument("--json", help="also write the table as JSON")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("grid", help="dump the mobility function on a dense (slope, roughness) grid")
    p.add_argument("-o", "--output", default="-", help="CSV path or - for stdout")
    p.add_argument("--slope-min", type=float, default=0.0)
    p.add_argument("--slope-max", type=float, default=50.0)
    p.add_argument("--slope-step", type=float, default=1.0)
    p.add_argument("--roughness-min", type=float, default=1.0)
    p.add_argument("--roughness-max", type=float, default=2.4)
    p.add_argument("--roughness-step", type=float, default=0.05)
    _add_config_flags(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("project", help="render a scored PLY onto an image")
    p.add_argument("input", help="scored PLY written by 'process'")
    p.add_argument("-o", "--output", required=True, help="output PPM")
    p.add_argument("--image", help="background image (PPM, or PNG with Pillow)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_project)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StageError as exc:
        print(f"error in stage {exc}", file=sys.stderr)
        return EXIT_STAGE
    except MobilityMapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
