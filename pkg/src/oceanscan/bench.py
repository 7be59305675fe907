"""Scaling benchmark harness on synthetic data.

Four suites: strongScaling fixes the data and sweeps workers; weakScaling
grows time steps in lockstep with workers; resolutionScaling fixes workers
and grows the data volume through V, 4V, 16V; ioLoad measures per-step
load time while concurrent readers share one NetCDF file (the metadata
serialization makes load time rise with reader count). Results go to a
CSV with the stable schema operation,workers,scale,seconds plus rendered
runtime figures.
"""
from __future__ import annotations

import csv
import io
import statistics
import time as _time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import fronts, synthetic
from .errors import InvalidParameterError
from .parallel import _FORK

SUITES = ("weakScaling", "strongScaling", "resolutionScaling", "ioLoad")


@dataclass
class BenchmarkRecord:
    operation: str
    workers: int
    data_scale: float
    wall_clock: float
    timestamp: str

    @staticmethod
    def now(operation, workers, scale, seconds) -> "BenchmarkRecord":
        if seconds <= 0:
            seconds = 1e-9
        return BenchmarkRecord(operation, workers, scale,
                               seconds, datetime.now(timezone.utc).isoformat())


def records_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["operation", "workers", "scale", "seconds"])
    for r in records:
        writer.writerow([r.operation, r.workers, r.data_scale, f"{r.wall_clock:.6f}"])
    return buf.getvalue()


def _time_track(dataset, workers: int) -> float:
    spec = fronts.IsovolumeSpec(variable="salinity", threshold=35.0)
    t0 = _time.perf_counter()
    fronts.build_track_graph(dataset, spec, n=3, workers=workers)
    return _time.perf_counter() - t0


def _probe_task(shared, seed):
    size = shared
    rng = np.random.default_rng(seed)
    a = rng.random(size)
    s = 0.0
    for _ in range(8):
        s += float(np.add.reduce(np.sqrt(a * a + 1.0)))
    return s


def parallel_ceiling(workers: int, tasks: int = 16, task_seconds: float = 0.05,
                     repeats: int = 3) -> float:
    """Demonstrated best-case pool speedup on this host.

    Maps embarrassingly parallel numpy tasks, sized to the granularity of
    one tracking step, through the same worker pool, and reports median
    serial over median parallel wall clock. Values well below the worker
    count reveal shared cores, hyperthreads, or sandbox scheduling
    overhead, which bounds what any real workload can achieve here.
    """
    from .parallel import WorkerPool

    size = 200_000
    t0 = _time.perf_counter()
    _probe_task(size, 0)
    once = _time.perf_counter() - t0
    size = max(10_000, int(size * task_seconds / max(once, 1e-6)))

    def run(w):
        pool = WorkerPool(w)
        t0 = _time.perf_counter()
        pool.map(_probe_task, size, range(tasks))
        return _time.perf_counter() - t0

    serial = statistics.median(run(1) for _ in range(repeats))
    parallel = statistics.median(run(workers) for _ in range(repeats))
    return serial / parallel


def _median_time(fn, repeats: int) -> float:
    return statistics.median(fn() for _ in range(max(1, repeats)))


def strong_scaling(workers_list=(1, 2, 4, 8), scale=1, nsteps=8, base_n=48,
                   repeats=3, operation="track"):
    """Fixed data, sweep workers."""
    dataset = synthetic.benchmark_dataset(scale=scale, nsteps=nsteps, base_n=base_n)
    records = []
    for w in workers_list:
        seconds = _median_time(lambda: _time_track(dataset, w), repeats)
        records.append(BenchmarkRecord.now(operation, w, scale, seconds))
    return records


def weak_scaling(workers_list=(1, 2, 4, 8), base_steps=2, base_n=48, repeats=3,
                 operation="track"):
    """Workers and time steps grow together; flat is ideal."""
    records = []
    for w in workers_list:
        nsteps = base_steps * w
        dataset = synthetic.benchmark_dataset(scale=1, nsteps=nsteps, base_n=base_n)
        seconds = _median_time(lambda: _time_track(dataset, w), repeats)
        records.append(BenchmarkRecord.now(operation, w, float(nsteps) / base_steps, seconds))
    return records


def resolution_scaling(scales=(1, 4, 16), workers=1, nsteps=6, base_n=128, repeats=3,
                       operation="track"):
    """Fixed workers, grow the data volume; linear growth is ideal.

    Uses the minimum over repeats after a warmup run: at sub-second run
    times the best case is the noise-free estimate of algorithmic cost.
    """
    records = []
    for scale in scales:
        dataset = synthetic.benchmark_dataset(scale=scale, nsteps=nsteps, base_n=base_n)
        _time_track(dataset, workers)
        seconds = min(_time_track(dataset, workers) for _ in range(max(1, repeats)))
        records.append(BenchmarkRecord.now(operation, workers, scale, seconds))
    return records


def _io_reader(args):
    path, steps, variable = args
    from .dataset import ingest_netcdf

    ds = ingest_netcdf(path, [variable])
    for t in steps:
        ds.load(t, variable)
    return [rec.seconds for rec in ds.load_log]


def io_load(workers_list=(1, 2, 4, 8), nsteps=8, n=96, tmp_dir=".", repeats=1):
    """Concurrent readers of one shared NetCDF file, per-step load time.

    Every reader opens the same file and loads a disjoint set of time
    steps; the average per-step wall clock is reported per worker count.
    """
    tmp_dir = Path(tmp_dir)
    tmp_dir.mkdir(parents=True, exist_ok=True)
    path = tmp_dir / "ioload_fixture.nc"
    dataset = synthetic.benchmark_dataset(scale=1, nsteps=nsteps, base_n=n, land=False)
    sal = np.stack([dataset.load(t, "salinity").values for t in range(nsteps)])
    g = dataset.grid
    synthetic.write_classic_netcdf(path, g.time.coords, g.depth.coords, g.lat.coords,
                                   g.lon.coords, {"salinity": sal})
    records = []
    for w in workers_list:
        chunks = [list(range(k, nsteps, w)) for k in range(w)]
        times = []
        for _ in range(max(1, repeats)):
            if w == 1:
                results = [_io_reader((path, chunks[0], "salinity"))]
            else:
                with _FORK.Pool(processes=w) as pool:
                    results = pool.map(_io_reader, [(path, c, "salinity") for c in chunks])
            times.extend(t for chunk in results for t in chunk)
        records.append(BenchmarkRecord.now("loadTimeStep", w, 1, statistics.mean(times)))
    return records


def run_suite(suite: str, out_dir=".", **kwargs):
    """Run one suite, write its CSV and figure, return the records."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if suite == "strongScaling":
        records = strong_scaling(**kwargs)
    elif suite == "weakScaling":
        records = weak_scaling(**kwargs)
    elif suite == "resolutionScaling":
        records = resolution_scaling(**kwargs)
    elif suite == "ioLoad":
        records = io_load(tmp_dir=out_dir, **kwargs)
    else:
        raise InvalidParameterError(f"unknown suite {suite!r}; choose from {SUITES}")
    (out_dir / f"bench_{suite}.csv").write_text(records_csv(records))

    from . import report

    fig_path = out_dir / f"bench_{suite}.png"
    if suite == "resolutionScaling":
        report.plot_scale_sweep(records, fig_path, title=suite)
    else:
        report.plot_bench(records, fig_path, title=suite)
    return records
