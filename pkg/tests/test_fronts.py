import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oceanscan import synthetic
from oceanscan.dataset import ArrayDataset
from oceanscan.errors import InvalidInputError, InvalidParameterError
from oceanscan.fronts import (
    BinaryVolume,
    IsovolumeSpec,
    LabeledVolume,
    boundary_grid,
    build_track_graph,
    correspondence_arcs,
    extract_isovolume,
    group_fronts,
    longest_tracks,
    north_facing,
)
from oceanscan.grid import Grid4D, ScalarVolume

import oracles


def make_grid(nd, nlat, nlon):
    return Grid4D.from_coords(
        [0.0], np.arange(1.0, nd + 1.0), np.arange(float(nlat)), np.arange(float(nlon))
    )


def binary(bits):
    bits = np.asarray(bits, dtype=np.uint8)
    return BinaryVolume(make_grid(*bits.shape), bits)


class TestIsovolume:
    def test_uniform_36_psu(self):
        grid = make_grid(2, 4, 4)
        vals = np.full((2, 4, 4), 36.0)
        vals[:, 0, 0] = np.nan  # land
        out = extract_isovolume(ScalarVolume(grid, vals), IsovolumeSpec())
        assert out.bits[:, 0, 0].sum() == 0
        assert out.bits.sum() == 2 * 16 - 2

    def test_uniform_34_psu(self):
        grid = make_grid(2, 4, 4)
        out = extract_isovolume(ScalarVolume(grid, np.full((2, 4, 4), 34.0)), IsovolumeSpec())
        assert out.bits.sum() == 0

    def test_half_and_half_step(self):
        grid = make_grid(1, 4, 6)
        vals = np.full((1, 4, 6), 34.0)
        vals[:, :, 3:] = 36.0
        out = extract_isovolume(ScalarVolume(grid, vals), IsovolumeSpec())
        expected = np.zeros((1, 4, 6), dtype=np.uint8)
        expected[:, :, 3:] = 1
        assert np.array_equal(out.bits, expected)

    def test_leq_and_interval(self):
        grid = make_grid(1, 2, 2)
        vals = np.array([[[1.0, 2.0], [3.0, 4.0]]])
        vol = ScalarVolume(grid, vals)
        leq = extract_isovolume(vol, IsovolumeSpec(threshold=2.0, comparison="leq"))
        assert leq.bits.sum() == 2
        inter = extract_isovolume(
            vol, IsovolumeSpec(comparison="interval", interval=(2.0, 3.0))
        )
        assert inter.bits.sum() == 2
        with pytest.raises(InvalidParameterError):
            IsovolumeSpec(comparison="interval", interval=(3.0, 2.0))


class TestBoundary:
    def test_all_ones_no_boundary(self):
        out = boundary_grid(binary(np.ones((1, 5, 5))))
        assert out.bits.sum() == 0

    def test_3x3_block_ring(self):
        # DERIVED by hand enumeration: the 8 ring voxels are boundary, not the center
        bits = np.zeros((1, 7, 7))
        bits[0, 2:5, 2:5] = 1
        out = boundary_grid(binary(bits))
        assert out.bits[0, 3, 3] == 0
        assert out.bits.sum() == 8
        assert np.array_equal(out.bits[0, 2:5, 2:5].ravel(),
                              np.array([1, 1, 1, 1, 0, 1, 1, 1, 1], dtype=np.uint8))

    def test_isolated_voxel_is_boundary(self):
        bits = np.zeros((1, 5, 5))
        bits[0, 2, 2] = 1
        out = boundary_grid(binary(bits))
        assert out.bits[0, 2, 2] == 1
        assert out.bits.sum() == 1

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(31)
        bits = (rng.random((4, 12, 12)) > 0.55).astype(np.uint8)
        assert np.array_equal(boundary_grid(binary(bits)).bits, oracles.boundary_bits(bits))

    def test_subset_of_isovolume(self):
        rng = np.random.default_rng(32)
        bits = (rng.random((3, 10, 10)) > 0.5).astype(np.uint8)
        out = boundary_grid(binary(bits))
        assert np.all(out.bits <= bits)


class TestNorthFacing:
    def test_3x3_block_top_row(self):
        bits = np.zeros((1, 7, 7))
        bits[0, 2:5, 2:5] = 1
        iso = binary(bits)
        nf = north_facing(boundary_grid(iso), iso)
        assert nf.bits.sum() == 3
        assert np.array_equal(np.argwhere(nf.bits)[:, 1], np.array([4, 4, 4]))

    def test_full_width_band_north_edge(self):
        bits = np.zeros((1, 8, 6))
        bits[0, 2:5, :] = 1
        iso = binary(bits)
        nf = north_facing(boundary_grid(iso), iso)
        assert np.array_equal(np.argwhere(nf.bits)[:, 1], np.full(6, 4))

    def test_all_ones_nothing(self):
        iso = binary(np.ones((2, 5, 5)))
        nf = north_facing(boundary_grid(iso), iso)
        assert nf.bits.sum() == 0

    def test_domain_edge_counts_as_outside(self):
        # a boundary voxel on the top row is north-facing (edge = outside);
        # a full band flush to the edge has mean 1 there and no boundary at all
        lone = np.zeros((1, 4, 4))
        lone[0, 3, 1] = 1
        iso = binary(lone)
        nf = north_facing(boundary_grid(iso), iso)
        assert nf.bits[0, 3, 1] == 1

        band = np.zeros((1, 4, 4))
        band[0, 2:, :] = 1
        iso = binary(band)
        nf = north_facing(boundary_grid(iso), iso)
        assert nf.bits[0, 3, :].sum() == 0

    def test_requires_subset(self):
        iso = binary(np.zeros((1, 3, 3)))
        bnd = binary(np.ones((1, 3, 3)))
        with pytest.raises(InvalidInputError):
            north_facing(bnd, iso)

    def test_subset_of_boundary(self):
        rng = np.random.default_rng(33)
        bits = (rng.random((3, 10, 10)) > 0.5).astype(np.uint8)
        iso = binary(bits)
        bnd = boundary_grid(iso)
        nf = north_facing(bnd, iso)
        assert np.all(nf.bits <= bnd.bits)


class TestGroupFronts:
    def test_adjacent_depth_offset_n_minus_1_merges(self):
        n = 3
        bits = np.zeros((3, 9, 9))
        bits[0, 2, 2] = 1
        bits[1, 2 + n - 1, 2] = 1
        labeled, fronts = group_fronts(binary(bits), n)
        assert len(fronts) == 1

    def test_offset_beyond_n_splits(self):
        n = 3
        bits = np.zeros((3, 12, 12))
        bits[0, 2, 2] = 1
        bits[1, 2 + n + 1, 2] = 1
        labeled, fronts = group_fronts(binary(bits), n)
        assert len(fronts) == 2

    def test_empty_grid(self):
        labeled, fronts = group_fronts(binary(np.zeros((2, 5, 5))), 3)
        assert fronts == []
        assert labeled.labels.sum() == 0

    def test_even_n_rejected(self):
        with pytest.raises(InvalidParameterError):
            group_fronts(binary(np.zeros((1, 3, 3))), 2)

    def test_labels_contiguous_and_descriptors(self):
        rng = np.random.default_rng(34)
        bits = (rng.random((4, 14, 14)) > 0.9).astype(np.uint8)
        labeled, fronts = group_fronts(binary(bits), 3, time_step=5)
        k = labeled.labels.max()
        assert sorted(np.unique(labeled.labels[labeled.labels > 0])) == list(range(1, k + 1))
        assert len(fronts) == k
        for f in fronts:
            assert f.time_step == 5
            assert f.voxel_count > 0
            assert f.depth_range[0] <= f.depth_range[1]

    def test_matches_bruteforce_partition(self):
        # same voxel partition into fronts as the per-voxel BFS oracle
        rng = np.random.default_rng(35)
        for n in (1, 3):
            bits = (rng.random((4, 12, 12)) > 0.85).astype(np.uint8)
            labeled, _ = group_fronts(binary(bits), n)
            oracle = oracles.group_labels(bits, n)
            assert _same_partition(labeled.labels, oracle)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**30))
    def test_label_count_monotone_in_n(self, seed):
        rng = np.random.default_rng(seed)
        bits = (rng.random((3, 10, 10)) > 0.85).astype(np.uint8)
        counts = []
        for n in (1, 3, 5):
            _, fronts = group_fronts(binary(bits), n)
            counts.append(len(fronts))
        assert counts[0] >= counts[1] >= counts[2]


def _same_partition(a, b):
    """Two labelings describe the same partition of the nonzero voxels."""
    if not np.array_equal(a > 0, b > 0):
        return False
    mapping = {}
    reverse = {}
    for la, lb in zip(a[a > 0].ravel(), b[b > 0].ravel()):
        if mapping.setdefault(int(la), int(lb)) != int(lb):
            return False
        if reverse.setdefault(int(lb), int(la)) != int(la):
            return False
    return True


def labeled_from(bits_with_labels):
    arr = np.asarray(bits_with_labels, dtype=np.int32)
    return LabeledVolume(make_grid(*arr.shape), arr)


class TestCorrespondence:
    def test_identical_labelings_self_arcs(self):
        labels = np.zeros((1, 10, 10), dtype=np.int32)
        labels[0, 2, 2] = 1
        labels[0, 7, 7] = 2
        lv = labeled_from(labels)
        arcs = correspondence_arcs(lv, lv, 3)
        assert arcs == [(1, 1), (2, 2)]

    def test_translation_within_n(self):
        a = np.zeros((1, 12, 12), dtype=np.int32)
        b = np.zeros((1, 12, 12), dtype=np.int32)
        a[0, 4:6, 4:6] = 1
        b[0, 6:8, 6:8] = 1  # moved by (2, 2), inside radius 3
        arcs = correspondence_arcs(labeled_from(a), labeled_from(b), 3)
        assert arcs == [(1, 1)]

    def test_translation_beyond_n_no_arc(self):
        a = np.zeros((1, 20, 20), dtype=np.int32)
        b = np.zeros((1, 20, 20), dtype=np.int32)
        a[0, 2, 2] = 1
        b[0, 2, 9] = 1
        assert correspondence_arcs(labeled_from(a), labeled_from(b), 3) == []

    def test_split_into_two(self):
        a = np.zeros((1, 12, 12), dtype=np.int32)
        a[0, 5:7, 5:7] = 1
        b = np.zeros((1, 12, 12), dtype=np.int32)
        b[0, 4, 4] = 1
        b[0, 8, 8] = 2
        arcs = correspondence_arcs(labeled_from(a), labeled_from(b), 3)
        assert arcs == [(1, 1), (1, 2)]

    def test_grid_mismatch(self):
        a = labeled_from(np.zeros((1, 5, 5), dtype=np.int32))
        b = labeled_from(np.zeros((1, 6, 6), dtype=np.int32))
        with pytest.raises(InvalidInputError):
            correspondence_arcs(a, b, 3)

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(36)
        a = (rng.random((3, 14, 14)) > 0.9).astype(np.int32)
        b = (rng.random((3, 14, 14)) > 0.9).astype(np.int32) * 2
        got = set(correspondence_arcs(labeled_from(a), labeled_from(b), 3))
        assert got == oracles.arcs_between(a, b, 3)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**30), st.integers(-2, 2), st.integers(-2, 2))
    def test_translation_equivariance(self, seed, oy, ox):
        rng = np.random.default_rng(seed)
        a = np.zeros((1, 16, 16), dtype=np.int32)
        b = np.zeros((1, 16, 16), dtype=np.int32)
        a[0, 5:9, 5:9] = (rng.random((4, 4)) > 0.4).astype(np.int32)
        b[0, 5:9, 5:9] = (rng.random((4, 4)) > 0.4).astype(np.int32) * 2
        base = correspondence_arcs(labeled_from(a), labeled_from(b), 2)
        ta = np.roll(a, (oy, ox), axis=(1, 2))
        tb = np.roll(b, (oy, ox), axis=(1, 2))
        shifted = correspondence_arcs(labeled_from(ta), labeled_from(tb), 2)
        assert base == shifted


def moving_square_dataset(nsteps=4, size=3, step=2, nlat=24, nlon=24, nd=4):
    """Salinity blob (square of 36 psu) translating northeast by `step`
    voxels per time step over a 34 psu background."""
    sal = np.full((nsteps, nd, nlat, nlon), 34.0, dtype=np.float32)
    for t in range(nsteps):
        y = 3 + step * t
        x = 3 + step * t
        sal[t, :2, y : y + size, x : x + size] = 36.0
    grid = Grid4D.from_coords(
        np.arange(float(nsteps)), np.arange(1.0, nd + 1.0),
        np.arange(float(nlat)), np.arange(float(nlon)),
    )
    return ArrayDataset(grid, {"salinity": sal})


class TestTrackGraph:
    def test_translating_square_path_graph(self):
        # DERIVED from the serial single-worker oracle: 4 vertices, 3 arcs
        ds = moving_square_dataset()
        graph = build_track_graph(ds, IsovolumeSpec(), n=3)
        assert len(graph.vertices) == 4
        assert len(graph.arcs) == 3
        assert sorted(a[0] for a in graph.arcs) == [0, 1, 2]

    def test_static_blob_self_arcs(self):
        ds = moving_square_dataset(nsteps=5, step=0)
        graph = build_track_graph(ds, IsovolumeSpec(), n=3)
        assert len(graph.vertices) == 5
        assert len(graph.arcs) == 4
        assert all(a[1] == a[2] for a in graph.arcs)

    def test_worker_count_independence(self):
        ds = synthetic.standard_fixture(nlat=24, nlon=24, ndepth=8, nsteps=4)
        graphs = [
            build_track_graph(ds, IsovolumeSpec(), n=3, workers=w).to_json()
            for w in (1, 2, 4)
        ]
        assert graphs[0] == graphs[1] == graphs[2]

    def test_requires_two_steps(self):
        ds = moving_square_dataset(nsteps=4)
        with pytest.raises(InvalidParameterError):
            build_track_graph(ds, IsovolumeSpec(), time_range=(1, 1))

    def test_offset_time_range(self):
        ds = moving_square_dataset(nsteps=5)
        graph = build_track_graph(ds, IsovolumeSpec(), n=3, time_range=(2, 4))
        assert sorted(v.time_step for v in graph.vertices) == [2, 3, 4]
        assert sorted(a[0] for a in graph.arcs) == [2, 3]
        # matches the corresponding slice of the full graph
        full = build_track_graph(ds, IsovolumeSpec(), n=3)
        sliced = [a for a in full.arcs if a[0] in (2, 3)]
        assert sorted(graph.arcs) == sorted(sliced)

    def test_equals_bruteforce_pipeline(self):
        # oracle equivalence on a fixture with land, merges, and splits
        ds = synthetic.standard_fixture(nlat=20, nlon=20, ndepth=8, nsteps=4)
        spec = IsovolumeSpec()
        graph = build_track_graph(ds, spec, n=3)
        sal = [ds.load(t, "salinity").values for t in range(4)]
        labelings, arcs = oracles.front_pipeline(sal, 35.0, 3)
        _assert_graph_isomorphic(graph, ds, spec, labelings, arcs)


def _assert_graph_isomorphic(graph, ds, spec, oracle_labelings, oracle_arcs):
    """Exact isomorphism: match fronts by voxel sets, then compare arcs."""
    from oceanscan.fronts import extract_fronts

    mapping = {}  # (t, impl_label) -> (t, oracle_label)
    for t, oracle_labels in enumerate(oracle_labelings):
        vol = ds.load(t, spec.variable)
        labeled, _ = extract_fronts(vol, spec, graph.neighborhood, time_step=t)
        impl = labeled.labels
        assert np.array_equal(impl > 0, oracle_labels > 0)
        for lab in np.unique(impl[impl > 0]):
            voxels = impl == lab
            oracle_ids = np.unique(oracle_labels[voxels])
            assert oracle_ids.size == 1  # one-to-one on voxel sets
            mapping[(t, int(lab))] = (t, int(oracle_ids[0]))
    vertex_ids = set(graph.vertex_ids())
    assert set(mapping.keys()) == vertex_ids
    mapped_arcs = {
        (t, mapping[(t, a)][1], mapping[(t + 1, b)][1]) for (t, a, b) in graph.arcs
    }
    assert mapped_arcs == oracle_arcs


class TestLongestTracks:
    def graph(self, vertices, arcs, n=3):
        from oceanscan.fronts import SurfaceFront, TrackGraph

        vs = [
            SurfaceFront(t, lab, 1, (0.0, 0.0, 0.0), (0.0, 0.0)) for (t, lab) in vertices
        ]
        return TrackGraph(vs, arcs, n)

    def test_unique_path(self):
        g = self.graph([(0, 1), (1, 1), (2, 1), (3, 1)], [(0, 1, 1), (1, 1, 1), (2, 1, 1)])
        tracks = longest_tracks(g, 1)
        assert tracks == [[(0, 1), (1, 1), (2, 1), (3, 1)]]

    def test_longer_path_wins(self):
        # DERIVED: exhaustive enumeration of the two disjoint paths
        vertices = [(t, 1) for t in range(5)] + [(t, 2) for t in range(1, 4)]
        arcs = [(t, 1, 1) for t in range(4)] + [(t, 2, 2) for t in range(1, 3)]
        g = self.graph(vertices, arcs)
        tracks = longest_tracks(g, 1)
        assert tracks == [[(t, 1) for t in range(5)]]
        both = longest_tracks(g, 2)
        assert both[1] == [(t, 2) for t in range(1, 4)]

    def test_empty_graph(self):
        g = self.graph([], [])
        assert longest_tracks(g, 3) == []

    def test_invalid_k(self):
        g = self.graph([(0, 1)], [])
        with pytest.raises(InvalidParameterError):
            longest_tracks(g, 0)

    def test_tie_breaks_earlier_start_then_smaller_label(self):
        vertices = [(0, 1), (1, 1), (1, 2), (2, 2)]
        arcs = [(0, 1, 1), (1, 2, 2)]
        g = self.graph(vertices, arcs)
        tracks = longest_tracks(g, 2)
        assert tracks[0] == [(0, 1), (1, 1)]  # starts earlier than (1,2)->(2,2)
        assert tracks[1] == [(1, 2), (2, 2)]
