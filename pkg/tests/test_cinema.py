import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oceanscan import synthetic
from oceanscan.cinema import (
    CinemaIndex,
    compression_report,
    decode_float_image,
    encode_float_image,
    generate_database,
)
from oceanscan.errors import VariableNotFoundError


class TestFloatImageCodec:
    def test_pi_round_trip(self):
        arr = np.full((8, 8), np.pi, dtype=np.float32)
        out = decode_float_image(encode_float_image(arr))
        assert np.array_equal(out.view(np.uint32), arr.view(np.uint32))
        assert out[0, 0] == np.float32(3.1415927)

    def test_nan_round_trip(self):
        arr = np.full((4, 4), np.nan, dtype=np.float32)
        out = decode_float_image(encode_float_image(arr))
        assert np.all(np.isnan(out))
        assert np.array_equal(out.view(np.uint32), arr.view(np.uint32))

    def test_random_bytes_round_trip(self):
        # DERIVED fuzz oracle: arbitrary bit patterns survive the codec
        rng = np.random.default_rng(23)
        bits = rng.integers(0, 2**32, size=(256, 256), dtype=np.uint32)
        arr = bits.view(np.float32)
        out = decode_float_image(encode_float_image(arr))
        assert np.array_equal(out.view(np.uint32), bits)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 16), st.integers(1, 16))
    def test_any_value_any_shape(self, pattern, h, w):
        arr = np.full((h, w), np.uint32(pattern), dtype=np.uint32).view(np.float32)
        out = decode_float_image(encode_float_image(arr))
        assert np.array_equal(out.view(np.uint32), arr.view(np.uint32))

    def test_specials(self):
        specials = np.array(
            [np.inf, -np.inf, np.nan, 0.0, -0.0, np.float32(1e-45), np.float32(-1e-45)],
            dtype=np.float32,
        )
        arr = np.tile(specials, (3, 1))
        out = decode_float_image(encode_float_image(arr))
        assert np.array_equal(out.view(np.uint32), arr.view(np.uint32))


@pytest.fixture
def fixture_ds():
    return synthetic.standard_fixture(nlat=10, nlon=12, ndepth=3, nsteps=2)


class TestDatabase:
    def test_counts_and_index(self, fixture_ds, tmp_path):
        index = generate_database(fixture_ds, ["salinity", "u", "v"], out_dir=tmp_path / "db")
        # 3 fields x 2 steps x 3 depth levels
        assert len(index.rows) == 3 * 2 * 3
        pngs = list((tmp_path / "db").glob("*.png"))
        assert len(pngs) == 18
        assert (tmp_path / "db" / "data.csv").exists()
        assert (tmp_path / "db" / "metadata.json").exists()
        # uniqueness and completeness of (time, depth, field)
        keys = {(r[0], r[1], r[2]) for r in index.rows}
        assert len(keys) == len(index.rows)
        for t in (0, 1):
            for d in fixture_ds.grid.depth.coords:
                for f in ("salinity", "u", "v"):
                    assert (t, float(d), f) in keys

    def test_file_naming(self, fixture_ds, tmp_path):
        index = generate_database(fixture_ds, ["u"], out_dir=tmp_path / "db")
        assert index.rows[0][3] == "time0_depth0_u.png"

    def test_four_fields_hundred_steps(self, tmp_path):
        # 4 scalars over 100 steps and D levels: 400 * D images + one index
        from oceanscan.dataset import ArrayDataset
        from oceanscan.grid import Grid4D

        t, d, nlat, nlon = 100, 3, 6, 8
        grid = Grid4D.from_coords(np.arange(float(t)), np.arange(1.0, d + 1.0),
                                  np.arange(float(nlat)), np.arange(float(nlon)))
        rng = np.random.default_rng(41)
        arrays = {
            name: rng.random((t, d, nlat, nlon)).astype(np.float32)
            for name in ("salinity", "temperature", "u", "v")
        }
        ds = ArrayDataset(grid, arrays)
        index = generate_database(ds, list(arrays), out_dir=tmp_path / "db", workers=2)
        assert len(index.rows) == 400 * d
        assert len(list((tmp_path / "db").glob("*.png"))) == 400 * d
        assert (tmp_path / "db" / "data.csv").exists()

    def test_decoded_equals_source(self, fixture_ds, tmp_path):
        out = tmp_path / "db"
        index = generate_database(fixture_ds, ["salinity"], out_dir=out)
        vol = fixture_ds.load(1, "salinity").values.astype("<f4")
        png = (out / "time1_depth2_salinity.png").read_bytes()
        decoded = decode_float_image(png)
        assert np.array_equal(decoded.view(np.uint32), vol[2].view(np.uint32))

    def test_empty_time_range(self, fixture_ds, tmp_path):
        index = generate_database(fixture_ds, ["u"], time_range=(1, 0), out_dir=tmp_path / "db")
        assert index.rows == []

    def test_missing_field(self, fixture_ds, tmp_path):
        with pytest.raises(VariableNotFoundError):
            generate_database(fixture_ds, ["chlorophyll"], out_dir=tmp_path / "db")

    def test_regeneration_byte_identical(self, fixture_ds, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate_database(fixture_ds, ["salinity", "u"], out_dir=a, workers=1)
        generate_database(fixture_ds, ["salinity", "u"], out_dir=b, workers=2)
        files_a = sorted(p.name for p in a.iterdir())
        files_b = sorted(p.name for p in b.iterdir())
        assert files_a == files_b
        for name in files_a:
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_index_read_back(self, fixture_ds, tmp_path):
        out = tmp_path / "db"
        index = generate_database(fixture_ds, ["u", "v"], out_dir=out)
        back = CinemaIndex.read(out)
        assert back.rows == index.rows
        assert back.metadata["encoder"] == "f32le-rgba"

    def test_vertical_orientation(self, fixture_ds, tmp_path):
        out = tmp_path / "vert"
        index = generate_database(fixture_ds, ["u"], out_dir=out, orientation="vertical")
        # one image per (t, lon index)
        assert len(index.rows) == 2 * 12
        png = (out / index.rows[0][3]).read_bytes()
        decoded = decode_float_image(png)
        assert decoded.shape == (3, 10)  # depth x lat


class TestDerivedRecompute:
    def test_speed_from_database_matches_grid_core(self, fixture_ds, tmp_path):
        from oceanscan.grid import SPEED, derived_field

        out = tmp_path / "db"
        generate_database(fixture_ds, ["u", "v"], out_dir=out)
        vel = fixture_ds.load_vector(0)
        # grid-core speed on the float32 data
        expected = derived_field(
            synthetic.vector_volume(
                fixture_ds.grid,
                vel.u.values.astype(np.float32),
                vel.v.values.astype(np.float32),
            ),
            SPEED,
        ).values
        for d in range(3):
            u = decode_float_image((out / f"time0_depth{d}_u.png").read_bytes())
            v = decode_float_image((out / f"time0_depth{d}_v.png").read_bytes())
            recomputed = np.sqrt(u * u + v * v)
            assert recomputed.dtype == np.float32
            assert np.array_equal(
                recomputed.view(np.uint32), expected[d].astype("<f4").view(np.uint32)
            )


def test_compression_report(tmp_path, fixture_ds):
    src = tmp_path / "raw"
    from oceanscan.dataset import write_raw

    write_raw(fixture_ds, src)
    out = tmp_path / "db"
    index = generate_database(fixture_ds, ["salinity"], out_dir=out)
    rep = compression_report(src, index)
    assert rep["sourceBytes"] > 0
    assert rep["databaseBytes"] > 0
    assert rep["ratio"] == rep["databaseBytes"] / rep["sourceBytes"]
    # keeping one of three variables at all levels: the database must be
    # smaller than the raw source
    assert rep["ratio"] < 1.0
