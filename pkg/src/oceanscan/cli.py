"""Command-line interface.

Exit codes: 0 success, 2 validation error, 3 runtime error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import OceanscanError, ValidationError

log = logging.getLogger("oceanscan")


def _add_common(p):
    p.add_argument("--workers", type=int, default=1, help="worker count (default 1)")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--config", help="JSON config file with defaults for this command")
    p.add_argument("--log-level", default="info",
                   choices=["debug", "info", "warning", "error"])


def _clip_args(p):
    p.add_argument("--clip", help="lonMin,lonMax,latMin,latMax geographic box")
    p.add_argument("--max-depth", type=float, default=None, help="clip depth (m)")
    p.add_argument("--time-range", help="inclusive step range first:last")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="oceanscan",
        description="Extract and track ocean features from rectilinear model output.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read NetCDF, clip, write the raw internal format")
    p.add_argument("input")
    p.add_argument("--vars", required=True, help="comma-separated variable names")
    _clip_args(p)
    _add_common(p)

    p = sub.add_parser("resample", help="resample onto regular depth levels and uniform lat-lon")
    p.add_argument("input")
    p.add_argument("--depth-step", type=float, required=True)
    p.add_argument("--max-depth", type=float, required=True)
    p.add_argument("--factor", type=int, default=1, help="resolution factor r in 1/(12r) degrees")
    _add_common(p)

    p = sub.add_parser("derive", help="compute a derived field for every time step")
    p.add_argument("input")
    p.add_argument("--kind", required=True, choices=["speed", "vorticity", "curl", "okubo_weiss"])
    p.add_argument("--u", default="u")
    p.add_argument("--v", default="v")
    _add_common(p)

    p = sub.add_parser("seeds", help="place fieldline seeds")
    p.add_argument("input")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--strategy", default="uniform",
                   help="uniform | speed | vorticity | curl | okubo_weiss | scalar:NAME")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--time-step", type=int, default=0)
    p.add_argument("--u", default="u")
    p.add_argument("--v", default="v")
    _add_common(p)

    for name, helptext in [("streamlines", "integrate streamlines for one time step"),
                           ("pathlines", "trace particles across time steps")]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("input")
        p.add_argument("--count", type=int, default=100)
        p.add_argument("--strategy", default="uniform")
        p.add_argument("--rng-seed", type=int, default=0)
        p.add_argument("--step-size", type=float, default=0.05)
        p.add_argument("--max-steps", type=int, default=1000)
        p.add_argument("--direction", default="forward", choices=["forward", "backward", "both"])
        p.add_argument("--time-step", type=int, default=0)
        p.add_argument("--time-range", help="first:last (pathlines)")
        p.add_argument("--u", default="u")
        p.add_argument("--v", default="v")
        p.add_argument("--w", default=None)
        _add_common(p)

    p = sub.add_parser("fronts", help="extract surface fronts at one time step")
    p.add_argument("input")
    p.add_argument("--variable", default="salinity")
    p.add_argument("--threshold", type=float, default=35.0)
    p.add_argument("--comparison", default="geq", choices=["geq", "leq", "interval"])
    p.add_argument("--interval", help="lo,hi for interval comparison")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--time-step", type=int, default=0)
    _add_common(p)

    p = sub.add_parser("track", help="build the surface-front track graph")
    p.add_argument("input")
    p.add_argument("--variable", default="salinity")
    p.add_argument("--threshold", type=float, default=35.0)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=5, help="number of longest tracks to export")
    p.add_argument("--time-range", help="first:last")
    _add_common(p)

    p = sub.add_parser("eddies", help="detect eddies in one time step")
    p.add_argument("input")
    p.add_argument("--time-step", type=int, default=0)
    p.add_argument("--persistence-threshold", type=float, default=None)
    p.add_argument("--step-size", type=float, default=None)
    p.add_argument("--max-steps", type=int, default=4000)
    p.add_argument("--r-max", type=float, default=16.0)
    p.add_argument("--closure-fraction", type=float, default=0.2)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--u", default="u")
    p.add_argument("--v", default="v")
    _add_common(p)

    p = sub.add_parser("profile", help="sample a vertical needle at lon,lat")
    p.add_argument("input")
    p.add_argument("--lon", type=float, required=True)
    p.add_argument("--lat", type=float, required=True)
    p.add_argument("--fields", help="comma-separated field subset")
    p.add_argument("--intervals", help="depth intervals lo:hi[,lo:hi...]")
    p.add_argument("--time-range", help="first:last")
    _add_common(p)

    p = sub.add_parser("cinema", help="generate the float-image database")
    p.add_argument("input")
    p.add_argument("--fields", help="comma-separated fields (default: all)")
    p.add_argument("--time-range", help="first:last")
    p.add_argument("--orientation", default="depth", choices=["depth", "vertical"])
    p.add_argument("--report", action="store_true",
                   help="also write a compression report against the input")
    _add_common(p)

    p = sub.add_parser("bench", help="run a scaling benchmark suite")
    p.add_argument("--suite", required=True,
                   choices=["weakScaling", "strongScaling", "resolutionScaling", "ioLoad"])
    p.add_argument("--workers-list", default="1,2,4,8")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--base-n", type=int, default=48)
    p.add_argument("--nsteps", type=int, default=8)
    _add_common(p)

    p = sub.add_parser("viewer-export", help="bundle cinema DB + overlays + profile for the viewer")
    p.add_argument("input")
    p.add_argument("--fields", help="comma-separated fields (default: all)")
    p.add_argument("--probe", help="lon,lat depth-profile probe position")
    p.add_argument("--variable", default="salinity", help="front-tracking variable")
    p.add_argument("--threshold", type=float, default=35.0)
    p.add_argument("--u", default="u")
    p.add_argument("--v", default="v")
    p.add_argument("--time-range", help="first:last")
    _add_common(p)

    p = sub.add_parser("run", help="execute a pipeline config end to end")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=None, help="override config workers")
    p.add_argument("--out", default=None, help="override config output directory")
    p.add_argument("--log-level", default="info",
                   choices=["debug", "info", "warning", "error"])
    return parser


def _parse_range(text):
    if not text:
        return None
    a, b = text.split(":")
    return (int(a), int(b))


def _parse_clip(args):
    from .dataset import ClipSpec

    if not args.clip:
        return None
    lon_min, lon_max, lat_min, lat_max = (float(x) for x in args.clip.split(","))
    return ClipSpec(lon_min, lon_max, lat_min, lat_max,
                    max_depth=args.max_depth if args.max_depth else 1e9,
                    time_range=_parse_range(args.time_range))


def _steps_for(args):
    """Translate a subcommand invocation into a single-step pipeline."""
    c = args.command
    if c == "ingest":
        return [{"op": "ingest"}]
    if c == "resample":
        return [{"op": "resample", "depthStep": args.depth_step, "maxDepth": args.max_depth,
                 "factor": args.factor}]
    if c == "derive":
        return [{"op": "derive", "kinds": [args.kind], "u": args.u, "v": args.v},
                {"op": "ingest", "name": "derived"}]
    if c == "seeds":
        return [{"op": "seeds", "count": args.count, "strategy": args.strategy,
                 "rngSeed": args.rng_seed, "timeStep": args.time_step,
                 "u": args.u, "v": args.v}]
    if c in ("streamlines", "pathlines"):
        step = {"op": c, "count": args.count, "strategy": args.strategy,
                "rngSeed": args.rng_seed, "stepSize": args.step_size,
                "maxSteps": args.max_steps, "direction": args.direction,
                "timeStep": args.time_step, "u": args.u, "v": args.v}
        if args.w:
            step["w"] = args.w
        if c == "pathlines" and args.time_range:
            step["timeRange"] = list(_parse_range(args.time_range))
        return [step]
    if c == "fronts":
        step = {"op": "fronts", "variable": args.variable, "threshold": args.threshold,
                "comparison": args.comparison, "n": args.n, "timeStep": args.time_step}
        if args.interval:
            step["interval"] = [float(x) for x in args.interval.split(",")]
        return [step]
    if c == "track":
        step = {"op": "track", "variable": args.variable, "threshold": args.threshold,
                "n": args.n, "k": args.k}
        if args.time_range:
            step["timeRange"] = list(_parse_range(args.time_range))
        return [step]
    if c == "eddies":
        step = {"op": "eddies", "timeStep": args.time_step, "n": args.n,
                "rMax": args.r_max, "closureFraction": args.closure_fraction,
                "u": args.u, "v": args.v, "maxSteps": args.max_steps}
        if args.persistence_threshold is not None:
            step["persistenceThreshold"] = args.persistence_threshold
        if args.step_size is not None:
            step["stepSize"] = args.step_size
        return [step]
    if c == "profile":
        step = {"op": "profile", "lon": args.lon, "lat": args.lat}
        if args.fields:
            step["fields"] = args.fields.split(",")
        if args.intervals:
            step["intervals"] = [
                [float(x) for x in iv.split(":")] for iv in args.intervals.split(",")
            ]
        if args.time_range:
            step["timeRange"] = list(_parse_range(args.time_range))
        return [step]
    if c == "cinema":
        step = {"op": "cinema", "orientation": args.orientation}
        if args.fields:
            step["fields"] = args.fields.split(",")
        if args.time_range:
            step["timeRange"] = list(_parse_range(args.time_range))
        return [step]
    if c == "viewer-export":
        step = {"op": "viewer-export", "variable": args.variable, "threshold": args.threshold,
                "u": args.u, "v": args.v}
        if args.fields:
            step["fields"] = args.fields.split(",")
        if args.probe:
            step["probe"] = [float(x) for x in args.probe.split(",")]
        if args.time_range:
            step["timeRange"] = list(_parse_range(args.time_range))
        return [step]
    raise ValidationError(f"unhandled command {c!r}")


def _dispatch(args) -> int:
    from .runner import PipelineConfig, run

    if args.command == "run":
        config = PipelineConfig.from_json(Path(args.config).read_text())
        if args.workers:
            config.workers = args.workers
        if args.out:
            config.out_dir = args.out
        manifest = run(config)
        print(json.dumps({"ok": manifest["ok"], "failedAt": manifest["failedAt"]}))
        return 0 if manifest["ok"] else 3

    if args.command == "bench":
        from .bench import run_suite

        workers_list = tuple(int(x) for x in args.workers_list.split(","))
        kwargs = {"repeats": args.repeats}
        if args.suite in ("strongScaling", "weakScaling"):
            kwargs["workers_list"] = workers_list
            kwargs["base_n"] = args.base_n
        if args.suite == "strongScaling":
            kwargs["nsteps"] = args.nsteps
        if args.suite == "ioLoad":
            kwargs["workers_list"] = workers_list
            kwargs["nsteps"] = args.nsteps
        records = run_suite(args.suite, out_dir=args.out, **kwargs)
        for r in records:
            print(f"{r.operation} workers={r.workers} scale={r.data_scale} {r.wall_clock:.3f}s")
        return 0

    variables = None
    if getattr(args, "vars", None):
        variables = args.vars.split(",")
    config = PipelineConfig(
        input_path=args.input,
        steps=_steps_for(args),
        variables=variables,
        clip=_parse_clip(args) if hasattr(args, "clip") else None,
        workers=args.workers,
        out_dir=args.out,
    )
    manifest = run(config)
    if args.command == "cinema" and getattr(args, "report", False) and manifest["ok"]:
        from .cinema import CinemaIndex, compression_report

        index = CinemaIndex.read(Path(args.out) / "cinema")
        rep = compression_report(args.input, index)
        (Path(args.out) / "compression_report.json").write_text(
            json.dumps(rep, indent=2, sort_keys=True))
        print(f"compression ratio: {rep['ratio']:.4g}")
    if not manifest["ok"]:
        step = next(s for s in manifest["steps"] if s["status"] == "failed")
        print(f"step {manifest['failedAt']!r} failed: {step['error']}", file=sys.stderr)
        return 3
    for art in manifest["artifacts"]:
        log.info("artifact %s (%d bytes)", art["path"], art["bytes"])
    print(f"wrote {len(manifest['artifacts'])} artifacts to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # --config supplies defaults for the chosen subcommand; explicit flags win
    if getattr(args, "config", None) and args.command != "run":
        defaults = json.loads(Path(args.config).read_text())
        parser = build_parser()
        for action in parser._subparsers._group_actions[0].choices.values():  # noqa: SLF001
            known = {a.dest for a in action._actions}  # noqa: SLF001
            action.set_defaults(**{k.replace("-", "_"): v for k, v in defaults.items()
                                   if k.replace("-", "_") in known})
        args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper()),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except ValidationError as e:
        print(f"validation error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return 4
    except OceanscanError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
