import csv
import io

from oceanscan.bench import (
    BenchmarkRecord,
    io_load,
    records_csv,
    resolution_scaling,
    run_suite,
    strong_scaling,
    weak_scaling,
)


def test_records_csv_schema():
    records = [BenchmarkRecord.now("track", 2, 1.0, 0.5)]
    text = records_csv(records)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["operation", "workers", "scale", "seconds"]
    assert rows[1][0] == "track"
    assert float(rows[1][3]) > 0


def test_strong_scaling_records():
    records = strong_scaling(workers_list=(1, 2), nsteps=4, base_n=24, repeats=1)
    assert [r.workers for r in records] == [1, 2]
    assert all(r.wall_clock > 0 for r in records)
    assert all(r.operation == "track" for r in records)


def test_weak_scaling_records():
    records = weak_scaling(workers_list=(1, 2), base_steps=2, base_n=24, repeats=1)
    assert [r.workers for r in records] == [1, 2]
    assert records[1].data_scale == 2.0  # steps doubled


def test_resolution_scaling_records():
    records = resolution_scaling(scales=(1, 4), workers=1, nsteps=3, base_n=24, repeats=1)
    assert [r.data_scale for r in records] == [1, 4]


def test_io_load_contention_pattern(tmp_path):
    records = io_load(workers_list=(1, 2), nsteps=4, n=48, tmp_dir=tmp_path)
    assert [r.workers for r in records] == [1, 2]
    assert all(r.operation == "loadTimeStep" for r in records)
    assert all(r.wall_clock > 0 for r in records)


def test_run_suite_writes_csv_and_figure(tmp_path):
    records = run_suite("strongScaling", out_dir=tmp_path,
                        workers_list=(1, 2), nsteps=4, base_n=24, repeats=1)
    assert (tmp_path / "bench_strongScaling.csv").exists()
    assert (tmp_path / "bench_strongScaling.png").exists()
    text = (tmp_path / "bench_strongScaling.csv").read_text()
    assert text.splitlines()[0] == "operation,workers,scale,seconds"
    assert len(records) == 2


def test_run_suite_resolution_figure(tmp_path):
    run_suite("resolutionScaling", out_dir=tmp_path,
              scales=(1, 4), workers=1, nsteps=3, base_n=24, repeats=1)
    assert (tmp_path / "bench_resolutionScaling.png").exists()
