import numpy as np
import pytest

from oceanscan.dataset import ArrayDataset
from oceanscan.depth_profile import (
    profile_csv,
    profile_json,
    sample_needle,
    select_depth_interval,
)
from oceanscan.errors import OutOfDomainError
from oceanscan.grid import Grid4D

import oracles


def dataset_from(values_by_var, depth, lat, lon, nsteps=1):
    grid = Grid4D.from_coords(np.arange(float(nsteps)), depth, lat, lon)
    return ArrayDataset(grid, values_by_var)


@pytest.fixture
def simple_ds():
    rng = np.random.default_rng(17)
    depth = np.arange(1.0, 6.0)
    lat = np.linspace(10.0, 14.0, 5)
    lon = np.linspace(80.0, 84.0, 5)
    sal = rng.random((2, 5, 5, 5)).astype(np.float64)
    temp = rng.random((2, 5, 5, 5)).astype(np.float64)
    sal[:, :, 0, 0] = np.nan
    return dataset_from({"salinity": sal, "temp": temp}, depth, lat, lon, nsteps=2), sal, temp


def test_needle_at_grid_node(simple_ds):
    ds, sal, temp = simple_ds
    prof = sample_needle(ds, lon=82.0, lat=12.0)
    assert np.array_equal(prof.samples["salinity"][0], sal[0, :, 2, 2])
    assert np.array_equal(prof.samples["temp"][1], temp[1, :, 2, 2])
    assert prof.time_steps == [0, 1]


def test_needle_bilinear_exact_field(simple_ds):
    # DERIVED: f = a*lon + b*lat is reproduced exactly by bilinear interpolation
    ds, _, _ = simple_ds
    depth = ds.grid.depth.coords
    lat = ds.grid.lat.coords
    lon = ds.grid.lon.coords
    a, b = 0.7, -1.3
    plane = a * lon[None, None, None, :] + b * lat[None, None, :, None]
    plane = np.broadcast_to(plane, (1, 5, 5, 5)).copy()
    ds2 = dataset_from({"f": plane}, depth, lat, lon)
    q_lon, q_lat = 82.5, 12.5  # cell center
    prof = sample_needle(ds2, q_lon, q_lat)
    expected = a * q_lon + b * q_lat
    assert np.allclose(prof.samples["f"][0], expected, atol=1e-12)
    # cross-check one sample against the loop-based oracle
    oracle = oracles.bilinear_point(plane[0, 0], lat, lon, q_lat, q_lon)
    assert prof.samples["f"][0][0] == pytest.approx(oracle, abs=1e-12)


def test_nan_corner_poisons(simple_ds):
    ds, sal, _ = simple_ds
    # query inside the cell whose corner (0,0) is NaN
    prof = sample_needle(ds, lon=80.5, lat=10.5)
    assert np.all(np.isnan(prof.samples["salinity"][0]))
    # temp has no NaN corners there
    assert np.all(np.isfinite(prof.samples["temp"][0]))


def test_out_of_domain(simple_ds):
    ds, _, _ = simple_ds
    with pytest.raises(OutOfDomainError):
        sample_needle(ds, lon=200.0, lat=12.0)


def test_linearity(simple_ds):
    # needle(a f + b g) == a needle(f) + b needle(g)
    ds, sal, temp = simple_ds
    depth = ds.grid.depth.coords
    combo = 2.0 * np.nan_to_num(sal) + 0.5 * temp
    ds2 = dataset_from(
        {"f": np.nan_to_num(sal), "g": temp, "combo": combo},
        depth, ds.grid.lat.coords, ds.grid.lon.coords, nsteps=2,
    )
    prof = sample_needle(ds2, 82.3, 11.7)
    lhs = prof.samples["combo"][0]
    rhs = 2.0 * prof.samples["f"][0] + 0.5 * prof.samples["g"][0]
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_time_step_independence(simple_ds):
    ds, _, _ = simple_ds
    whole = sample_needle(ds, 82.0, 12.0)
    only_t1 = sample_needle(ds, 82.0, 12.0, time_range=(1, 1))
    assert np.array_equal(whole.samples["salinity"][1], only_t1.samples["salinity"][0],
                          )


def test_filament_fixture_salinity_drop_top_200m():
    # pattern-level check: between two steps the salinity drop is confined
    # to the top 200 m at the needle position
    depth = np.arange(25.0, 525.0, 25.0)  # 25..500 m
    lat = np.linspace(15.0, 20.0, 11)
    lon = np.linspace(86.0, 91.0, 11)
    base = np.full((2, 20, 11, 11), 35.5)
    drop = np.where(depth[:, None, None] <= 200.0, 1.2, 0.0)
    base[1] -= drop
    ds = dataset_from({"salinity": base}, depth, lat, lon, nsteps=2)
    prof = sample_needle(ds, lon=88.5, lat=17.5, fields=["salinity"])
    diff = prof.samples["salinity"][1] - prof.samples["salinity"][0]
    shallow = prof.depths <= 200.0
    assert np.all(diff[shallow] < -1.0)
    assert np.allclose(diff[~shallow], 0.0, atol=1e-12)


class TestIntervals:
    def make_profile(self):
        depth = np.arange(1.0, 101.0)  # 1..100 m, 1 m spacing
        lat = np.linspace(0.0, 4.0, 5)
        lon = np.linspace(0.0, 4.0, 5)
        vals = np.broadcast_to(depth[None, :, None, None], (2, 100, 5, 5)).copy()
        ds = dataset_from({"f": vals}, depth, lat, lon, nsteps=2)
        return sample_needle(ds, 2.0, 2.0)

    def test_full_range_identity(self):
        prof = self.make_profile()
        out = select_depth_interval(prof, [(0.0, 1000.0)])
        assert np.array_equal(out.depths, prof.depths)
        assert np.array_equal(out.samples["f"][0], prof.samples["f"][0])

    def test_two_10m_intervals_give_22_samples(self):
        prof = self.make_profile()
        out = select_depth_interval(prof, [(25.0, 35.0), (85.0, 95.0)])
        assert out.depths.size == 22
        for cols in out.samples.values():
            assert all(col.size == 22 for col in cols)

    def test_disjoint_interval_empty(self):
        prof = self.make_profile()
        out = select_depth_interval(prof, [(500.0, 600.0)])
        assert out.depths.size == 0
        assert all(col.size == 0 for col in out.samples["f"])


def test_single_depth_level():
    depth = np.array([7.0])
    lat = np.linspace(0.0, 2.0, 3)
    lon = np.linspace(0.0, 2.0, 3)
    vals = np.arange(9.0).reshape(1, 1, 3, 3)
    ds = dataset_from({"f": vals}, depth, lat, lon)
    prof = sample_needle(ds, 1.0, 1.0)
    assert prof.depths.tolist() == [7.0]
    assert prof.samples["f"][0][0] == 4.0


def test_csv_and_json_exports(simple_ds):
    ds, _, _ = simple_ds
    prof = sample_needle(ds, 80.5, 10.5)
    text = profile_csv(prof)
    lines = text.strip().split("\n")
    assert lines[0] == "time,depth,field,value"
    # 2 fields x 2 steps x 5 depths
    assert len(lines) == 1 + 2 * 2 * 5
    nan_rows = [ln for ln in lines[1:] if ln.endswith(",")]
    assert len(nan_rows) == 10  # the NaN salinity column, both steps

    import json

    doc = json.loads(profile_json(prof))
    assert doc["position"] == {"lon": 80.5, "lat": 10.5}
    assert doc["samples"]["salinity"][0][0] is None  # NaN -> null
    assert len(doc["depths"]) == 5
