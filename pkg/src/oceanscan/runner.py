"""Pipeline orchestration: validated step configs, execution, manifest.

A pipeline config names the input dataset, a clip box, the ordered steps
with their parameters, the worker count, and the output directory. Steps
are validated up front; execution writes every artifact under the output
directory and finishes with a manifest listing each artifact with its
sha256, plus per-step status. A failing step stops the run, keeps partial
artifacts, and marks the failure point in the manifest.
"""
from __future__ import annotations

import hashlib
import json
import time as _time
from dataclasses import dataclass, field
from pathlib import Path

from . import cinema, depth_profile, eddies, flow, fronts
from .dataset import ClipSpec, DerivedVariables, open_dataset, write_raw
from .errors import InvalidParameterError, ValidationError
from .grid import DERIVED_KINDS


@dataclass
class PipelineConfig:
    input_path: str
    steps: list  # [{"op": name, ...params}]
    variables: list | None = None
    clip: ClipSpec | None = None
    workers: int = 1
    out_dir: str = "out"
    metric: str = "spherical"

    @staticmethod
    def from_json(text: str) -> "PipelineConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"config is not valid JSON: {e}") from e
        if not isinstance(obj, dict) or "input" not in obj:
            raise ValidationError("config must be an object with an 'input' path")
        clip = None
        if "clip" in obj and obj["clip"]:
            c = obj["clip"]
            missing = [k for k in ("lonMin", "lonMax", "latMin", "latMax", "maxDepth")
                       if k not in c]
            if missing:
                raise ValidationError(f"clip is missing {missing}")
            clip = ClipSpec(
                c["lonMin"], c["lonMax"], c["latMin"], c["latMax"], c["maxDepth"],
                tuple(c["timeRange"]) if c.get("timeRange") else None,
            )
        return PipelineConfig(
            input_path=obj["input"],
            steps=list(obj.get("steps", [])),
            variables=obj.get("variables"),
            clip=clip,
            workers=int(obj.get("workers", 1)),
            out_dir=obj.get("outDir", "out"),
            metric=obj.get("metric", "spherical"),
        )


@dataclass
class StepResult:
    op: str
    status: str
    seconds: float
    error: str | None = None
    artifacts: list = field(default_factory=list)


class _Context:
    def __init__(self, dataset, out_dir: Path, workers: int):
        self.dataset = dataset
        self.out_dir = out_dir
        self.workers = workers
        self.artifacts: list[Path] = []

    def emit(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.artifacts.append(path)
        return path

    def note_tree(self, root: Path):
        for p in sorted(root.rglob("*")):
            if p.is_file():
                self.artifacts.append(p)


def _require(params, key, kind=None):
    if key not in params:
        raise InvalidParameterError(f"step {params.get('op')!r} is missing parameter {key!r}")
    value = params[key]
    if kind is not None and not isinstance(value, kind):
        raise InvalidParameterError(
            f"step {params.get('op')!r}: parameter {key!r} must be {kind}"
        )
    return value


def _iso_spec(params) -> fronts.IsovolumeSpec:
    return fronts.IsovolumeSpec(
        variable=params.get("variable", "salinity"),
        threshold=float(params.get("threshold", 35.0)),
        comparison=params.get("comparison", "geq"),
        interval=tuple(params["interval"]) if params.get("interval") else None,
    )


def _integration_params(params) -> flow.IntegrationParams:
    return flow.IntegrationParams(
        step_size=float(params.get("stepSize", 0.05)),
        max_steps=int(params.get("maxSteps", 1000)),
        direction=params.get("direction", "forward"),
        termination_speed=float(params.get("terminationSpeed", 1e-8)),
    )


def _step_ingest(ctx: _Context, params):
    out = ctx.out_dir / params.get("name", "raw")
    write_raw(ctx.dataset, out, variables=params.get("variables"),
              time_range=tuple(params["timeRange"]) if params.get("timeRange") else None)
    ctx.note_tree(out)
    ctx.dataset = open_dataset(out)


def _step_resample(ctx: _Context, params):
    from .dataset import ArrayDataset
    from .grid import Grid4D, ResampleSpec, resample_regular
    import numpy as np

    spec = ResampleSpec(
        depth_step=float(_require({**params, "op": "resample"}, "depthStep")),
        max_depth=float(_require({**params, "op": "resample"}, "maxDepth")),
        factor=int(params.get("factor", 1)),
    )
    ds = ctx.dataset
    arrays = {}
    grid = None
    for var in ds.variables:
        vols = []
        for t in range(ds.n_steps):
            out = resample_regular(ds.load(t, var), spec)
            vols.append(out.values)
            grid = out.grid
        arrays[var] = np.stack(vols)
    new_grid = Grid4D.from_coords(
        ds.grid.time.coords, grid.depth.coords, grid.lat.coords, grid.lon.coords,
        metric=ds.grid.metric,
    )
    resampled = ArrayDataset(new_grid, arrays)
    out = ctx.out_dir / params.get("name", "resampled")
    write_raw(resampled, out)
    ctx.note_tree(out)
    ctx.dataset = open_dataset(out)


def _step_derive(ctx: _Context, params):
    kinds = params.get("kinds", [params.get("kind", "speed")])
    for k in kinds:
        if k not in DERIVED_KINDS:
            raise InvalidParameterError(f"unknown derived field kind {k!r}")
    ctx.dataset = DerivedVariables(ctx.dataset, kinds,
                                   u=params.get("u", "u"), v=params.get("v", "v"))


def _seed_spec(params) -> flow.SeedSpec:
    region = None
    if params.get("region"):
        r = params["region"]
        region = flow.Region(
            lon=tuple(r["lon"]) if r.get("lon") else None,
            lat=tuple(r["lat"]) if r.get("lat") else None,
            depth=tuple(r["depth"]) if r.get("depth") else None,
        )
    return flow.SeedSpec(
        count=int(params.get("count", 100)),
        strategy=params.get("strategy", "uniform"),
        region=region,
        rng_seed=int(params.get("rngSeed", 0)),
    )


def _load_velocity(ctx: _Context, params, t=None):
    t = int(params.get("timeStep", 0)) if t is None else t
    return ctx.dataset.load_vector(
        t, params.get("u", "u"), params.get("v", "v"), params.get("w")
    )


def _step_seeds(ctx: _Context, params):
    spec = _seed_spec(params)
    if spec.strategy.startswith("scalar:"):
        source = ctx.dataset.load(int(params.get("timeStep", 0)), spec.strategy.split(":", 1)[1])
    else:
        source = _load_velocity(ctx, params)
    points, _vox = flow.place_seeds(source, spec)
    ctx.emit(params.get("name", "seeds.json"), json.dumps(
        {"points": [[float(x) for x in p] for p in points]}, indent=2))


def _step_streamlines(ctx: _Context, params):
    vel = _load_velocity(ctx, params)
    seeds = _resolve_seeds(ctx, params, vel)
    polys = flow.streamlines(vel, seeds, _integration_params(params), workers=ctx.workers)
    ctx.emit(params.get("name", "streamlines.geojson"),
             flow.polylines_geojson(polys, metric=ctx.dataset.grid.metric))


def _resolve_seeds(ctx, params, source):
    if params.get("seedsFile"):
        obj = json.loads((ctx.out_dir / params["seedsFile"]).read_text())
        return obj["points"]
    points, _ = flow.place_seeds(source, _seed_spec(params))
    return points


def _step_pathlines(ctx: _Context, params):
    vel0 = _load_velocity(ctx, params, t=0)
    seeds = _resolve_seeds(ctx, params, vel0)
    polys = flow.pathlines(
        ctx.dataset, seeds, _integration_params(params),
        time_range=tuple(params["timeRange"]) if params.get("timeRange") else None,
        u=params.get("u", "u"), v=params.get("v", "v"), w=params.get("w"),
        workers=ctx.workers,
    )
    ctx.emit(params.get("name", "pathlines.geojson"),
             flow.polylines_geojson(polys, metric=ctx.dataset.grid.metric))


def _step_fronts(ctx: _Context, params):
    t = int(params.get("timeStep", 0))
    volume = ctx.dataset.load(t, _iso_spec(params).variable)
    labeled, front_list = fronts.extract_fronts(volume, _iso_spec(params),
                                                int(params.get("n", 3)), time_step=t)
    ctx.emit(params.get("name", "fronts.json"), json.dumps(
        {
            "timeStep": t,
            "fronts": [
                {
                    "label": f.label,
                    "voxelCount": f.voxel_count,
                    "centroid": list(f.centroid),
                    "depthRange": list(f.depth_range),
                }
                for f in front_list
            ],
        },
        indent=2, sort_keys=True))


def _step_track(ctx: _Context, params):
    graph = fronts.build_track_graph(
        ctx.dataset, _iso_spec(params), n=int(params.get("n", 3)),
        time_range=tuple(params["timeRange"]) if params.get("timeRange") else None,
        workers=ctx.workers,
    )
    ctx.emit(params.get("name", "track_graph.json"), graph.to_json())
    tracks = fronts.longest_tracks(graph, int(params.get("k", 5))) if graph.vertices else []
    ctx.emit("tracks.geojson", fronts.tracks_geojson(graph, tracks))
    if params.get("figure", True):
        from . import report

        path = ctx.out_dir / "tracks.png"
        report.plot_tracks(graph, tracks, path)
        ctx.artifacts.append(path)


def _step_eddies(ctx: _Context, params):
    vel = _load_velocity(ctx, params)
    descs = eddies.detect_eddies(
        vel,
        persistence_threshold=params.get("persistenceThreshold"),
        params=_integration_params(params) if params.get("stepSize") else None,
        n=int(params.get("n", 3)),
        r_max=float(params.get("rMax", 16.0)),
        closure_fraction=float(params.get("closureFraction", 0.2)),
        workers=ctx.workers,
    )
    ctx.emit(params.get("name", "eddies.json"), eddies.eddies_json(descs))
    ctx.emit("eddies.geojson", eddies.eddies_geojson(descs, metric=ctx.dataset.grid.metric))


def _step_profile(ctx: _Context, params):
    prof = depth_profile.sample_needle(
        ctx.dataset,
        float(_require({**params, "op": "profile"}, "lon")),
        float(_require({**params, "op": "profile"}, "lat")),
        fields=params.get("fields"),
        time_range=tuple(params["timeRange"]) if params.get("timeRange") else None,
    )
    if params.get("intervals"):
        prof = depth_profile.select_depth_interval(prof, [tuple(iv) for iv in params["intervals"]])
    ctx.emit(params.get("name", "profile.csv"), depth_profile.profile_csv(prof))
    ctx.emit("profile.json", depth_profile.profile_json(prof))
    if params.get("figure", True):
        from . import report

        path = ctx.out_dir / "profile.png"
        report.plot_profile(prof, path)
        ctx.artifacts.append(path)


def _step_cinema(ctx: _Context, params):
    out = ctx.out_dir / params.get("name", "cinema")
    fields = params.get("fields") or list(ctx.dataset.variables)
    cinema.generate_database(
        ctx.dataset, fields,
        time_range=tuple(params["timeRange"]) if params.get("timeRange") else None,
        out_dir=out, workers=ctx.workers,
        orientation=params.get("orientation", "depth"),
    )
    ctx.note_tree(out)


def _step_viewer_export(ctx: _Context, params):
    """Bundle everything the browser viewer consumes into one directory."""
    out = ctx.out_dir / params.get("name", "viewer_data")
    fields = params.get("fields") or list(ctx.dataset.variables)
    cinema.generate_database(
        ctx.dataset, fields,
        time_range=tuple(params["timeRange"]) if params.get("timeRange") else None,
        out_dir=out, workers=ctx.workers,
    )
    iso = _iso_spec(params)
    if iso.variable in ctx.dataset.variables and ctx.dataset.n_steps >= 2:
        graph = fronts.build_track_graph(ctx.dataset, iso, n=int(params.get("n", 3)),
                                         workers=ctx.workers)
        tracks = fronts.longest_tracks(graph, int(params.get("k", 5))) if graph.vertices else []
        (out / "tracks.geojson").write_text(fronts.tracks_geojson(graph, tracks))
    if params.get("u", "u") in ctx.dataset.variables:
        vel = _load_velocity(ctx, params)
        descs = eddies.detect_eddies(vel, workers=ctx.workers,
                                     r_max=float(params.get("rMax", 8.0)))
        (out / "eddies.geojson").write_text(
            eddies.eddies_geojson(descs, metric=ctx.dataset.grid.metric))
    probe = params.get("probe")
    if probe:
        prof = depth_profile.sample_needle(ctx.dataset, probe[0], probe[1])
        (out / "profiles.json").write_text(depth_profile.profile_json(prof))
    ctx.note_tree(out)


_STEPS = {
    "ingest": _step_ingest,
    "resample": _step_resample,
    "derive": _step_derive,
    "seeds": _step_seeds,
    "streamlines": _step_streamlines,
    "pathlines": _step_pathlines,
    "fronts": _step_fronts,
    "track": _step_track,
    "eddies": _step_eddies,
    "profile": _step_profile,
    "cinema": _step_cinema,
    "viewer-export": _step_viewer_export,
}


def validate_config(config: PipelineConfig):
    """Reject unknown ops or malformed parameters before any work runs."""
    if not config.steps:
        raise ValidationError("pipeline has no steps")
    for step in config.steps:
        if not isinstance(step, dict) or "op" not in step:
            raise ValidationError(f"malformed step {step!r}: every step needs an 'op'")
        if step["op"] not in _STEPS:
            raise ValidationError(f"unknown step op {step['op']!r}")
        for key in ("n", "count", "maxSteps", "timeStep"):
            if key in step and not isinstance(step[key], int):
                raise ValidationError(f"step {step['op']!r}: {key} must be an integer")
    if config.workers < 1:
        raise ValidationError("workers must be >= 1")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def run(config: PipelineConfig) -> dict:
    """Execute the pipeline; returns the manifest (also written to disk)."""
    validate_config(config)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = open_dataset(config.input_path, variables=config.variables,
                           clip=config.clip, metric=config.metric)
    ctx = _Context(dataset, out_dir, config.workers)
    results: list[StepResult] = []
    failed_at = None
    for step in config.steps:
        op = step["op"]
        t0 = _time.perf_counter()
        try:
            _STEPS[op](ctx, step)
            results.append(StepResult(op, "ok", _time.perf_counter() - t0))
        except Exception as e:  # noqa: BLE001 - recorded in the manifest
            results.append(StepResult(op, "failed", _time.perf_counter() - t0, error=str(e)))
            failed_at = op
            break
    manifest = {
        "ok": failed_at is None,
        "failedAt": failed_at,
        "steps": [
            {"op": r.op, "status": r.status, "seconds": r.seconds, "error": r.error}
            for r in results
        ],
        "artifacts": [
            {
                "path": str(p.relative_to(out_dir)),
                "bytes": p.stat().st_size,
                "sha256": _sha256(p),
            }
            for p in ctx.artifacts
            if p.exists()
        ],
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest
