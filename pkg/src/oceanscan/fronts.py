"""Surface-front extraction and tracking over time.

The pipeline per time step: threshold the salinity field into a binary
isovolume, take the one-voxel inner boundary of each depth slice with a
3x3 averaging filter, keep the north-facing portion, then group segments
into surface fronts by dilating every set voxel into an n x n lat-lon
neighborhood extended one level down in depth and labeling the dilated
grid with 26-connectivity. Temporal correspondence between consecutive
steps uses a radius-n circular mask at constant depth. All per-step work
runs on independent workers; arcs are computed after the barrier at the
end of the extraction phase, so output is identical for any worker count.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import InvalidInputError, InvalidParameterError
from .grid import Grid4D, ScalarVolume
from .parallel import WorkerPool

GEQ = "geq"
LEQ = "leq"
INTERVAL = "interval"


@dataclass(frozen=True)
class IsovolumeSpec:
    """Threshold condition defining the water mass of interest."""

    variable: str = "salinity"
    threshold: float = 35.0
    comparison: str = GEQ
    interval: tuple[float, float] | None = None

    def __post_init__(self):
        if self.comparison not in (GEQ, LEQ, INTERVAL):
            raise InvalidParameterError(f"unknown comparison {self.comparison!r}")
        if self.comparison == INTERVAL:
            if self.interval is None or not self.interval[0] < self.interval[1]:
                raise InvalidParameterError("interval comparison needs (lo, hi) with lo < hi")


@dataclass(frozen=True)
class BinaryVolume:
    grid: Grid4D
    bits: np.ndarray

    def __post_init__(self):
        bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if bits.shape != self.grid.volume_shape:
            raise InvalidInputError("bits shape does not match grid")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)


@dataclass(frozen=True)
class LabeledVolume:
    grid: Grid4D
    labels: np.ndarray

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int32)
        if labels.shape != self.grid.volume_shape:
            raise InvalidInputError("labels shape does not match grid")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def n_labels(self) -> int:
        return int(self.labels.max(initial=0))


@dataclass(frozen=True)
class SurfaceFront:
    """One connected surface-front component at one time step."""

    time_step: int
    label: int
    voxel_count: int
    centroid: tuple[float, float, float]  # (lat, lon, depth)
    depth_range: tuple[float, float]


@dataclass
class TrackGraph:
    """Vertices are per-step surface fronts, arcs temporal correspondences."""

    vertices: list[SurfaceFront]
    arcs: list[tuple[int, int, int]]  # (from_t, from_label, to_label)
    neighborhood: int

    def vertex_ids(self):
        return [(v.time_step, v.label) for v in self.vertices]

    def to_json(self) -> str:
        return json.dumps(
            {
                "parameters": {"n": self.neighborhood},
                "vertices": [
                    {
                        "t": v.time_step,
                        "label": v.label,
                        "centroid": list(v.centroid),
                        "voxelCount": v.voxel_count,
                        "depthRange": list(v.depth_range),
                    }
                    for v in sorted(self.vertices, key=lambda v: (v.time_step, v.label))
                ],
                "arcs": [
                    {"fromT": a[0], "fromLabel": a[1], "toLabel": a[2]}
                    for a in sorted(self.arcs)
                ],
            },
            indent=2,
            sort_keys=True,
        )


def extract_isovolume(volume: ScalarVolume, spec: IsovolumeSpec) -> BinaryVolume:
    """Binary grid of voxels satisfying the threshold; NaN maps to 0."""
    v = volume.values
    if spec.comparison == GEQ:
        bits = v >= spec.threshold
    elif spec.comparison == LEQ:
        bits = v <= spec.threshold
    else:
        lo, hi = spec.interval
        bits = (v >= lo) & (v <= hi)
    bits = np.where(np.isnan(v), False, bits)
    return BinaryVolume(volume.grid, bits)


def _neighborhood_sums(bits2d):
    """3x3 set-voxel count and in-domain neighborhood size per voxel."""
    padded = np.pad(bits2d.astype(np.int32), 1)
    ones = np.pad(np.ones_like(bits2d, dtype=np.int32), 1)
    s = np.zeros_like(bits2d, dtype=np.int32)
    c = np.zeros_like(bits2d, dtype=np.int32)
    h, w = bits2d.shape
    for di in (0, 1, 2):
        for dj in (0, 1, 2):
            s += padded[di : di + h, dj : dj + w]
            c += ones[di : di + h, dj : dj + w]
    return s, c


def boundary_grid(iso: BinaryVolume) -> BinaryVolume:
    """Inner boundary per depth slice via a 3x3 averaging filter.

    A voxel is boundary when its 3x3 lat-lon neighborhood mean lies
    strictly between 0 and 1 (edge voxels average over the in-domain
    subset) and the voxel itself belongs to the isovolume, which picks the
    one-voxel ring on the water-mass side.
    """
    bits = iso.bits
    out = np.zeros_like(bits)
    for d in range(bits.shape[0]):
        s, c = _neighborhood_sums(bits[d])
        out[d] = (bits[d] == 1) & (s < c)
    return BinaryVolume(iso.grid, out)


def north_facing(boundary: BinaryVolume, iso: BinaryVolume) -> BinaryVolume:
    """Boundary voxels whose +lat neighbor is outside the isovolume.

    The northern domain edge counts as outside, so a front running into
    the boundary of the clipped region is still north-facing there.
    """
    if np.any(boundary.bits > iso.bits):
        raise InvalidInputError("boundary must be a subset of the isovolume")
    north_iso = np.zeros_like(iso.bits)
    north_iso[:, :-1, :] = iso.bits[:, 1:, :]
    out = boundary.bits & (north_iso == 0)
    return BinaryVolume(iso.grid, out)


def _dilate_nn2(bits, n):
    """Dilate each set voxel into an n x n lat-lon block extended one
    depth level down (the n x n x 2 neighborhood)."""
    h = n // 2
    nd, nlat, nlon = bits.shape
    out = np.zeros_like(bits)
    src = bits.astype(bool)
    for dd in (0, 1):
        for di in range(-h, h + 1):
            for dj in range(-h, h + 1):
                d0, d1 = max(0, dd), min(nd, nd + dd)
                i0, i1 = max(0, di), min(nlat, nlat + di)
                j0, j1 = max(0, dj), min(nlon, nlon + dj)
                out[d0:d1, i0:i1, j0:j1] |= src[d0 - dd : d1 - dd, i0 - di : i1 - di, j0 - dj : j1 - dj]
    return out


_CONN26 = np.ones((3, 3, 3), dtype=bool)


def group_fronts(nf: BinaryVolume, n: int = 3, time_step: int = 0):
    """Group north-facing segments into labeled surface fronts.

    Segments whose dilated neighborhoods touch (within distance n in
    lat-lon, across adjacent depth levels) receive one label; labels are
    contiguous 1..K.
    """
    if n < 1 or n % 2 == 0:
        raise InvalidParameterError("neighborhood distance n must be odd and >= 1")
    dilated = _dilate_nn2(nf.bits, n)
    labels, _count = ndimage.label(dilated, structure=_CONN26)
    labels = labels.astype(np.int32) * nf.bits
    labels = _compress_labels(labels)
    fronts = _front_descriptors(labels, nf.grid, time_step)
    return LabeledVolume(nf.grid, labels), fronts


def _compress_labels(labels):
    present = np.unique(labels)
    present = present[present > 0]
    if present.size == 0 or present[-1] == present.size:
        return labels
    remap = np.zeros(int(present[-1]) + 1, dtype=np.int32)
    remap[present] = np.arange(1, present.size + 1, dtype=np.int32)
    return remap[labels]


def _front_descriptors(labels, grid: Grid4D, time_step: int):
    fronts = []
    k = int(labels.max(initial=0))
    if k == 0:
        return fronts
    depth_c = grid.depth.coords
    lat_c = grid.lat.coords
    lon_c = grid.lon.coords
    dd, ii, jj = np.nonzero(labels)
    order = np.argsort(labels[dd, ii, jj], kind="stable")
    dd, ii, jj = dd[order], ii[order], jj[order]
    bounds = np.searchsorted(labels[dd, ii, jj], np.arange(1, k + 2))
    for lab in range(1, k + 1):
        sel = slice(bounds[lab - 1], bounds[lab])
        d, i, j = dd[sel], ii[sel], jj[sel]
        fronts.append(
            SurfaceFront(
                time_step=time_step,
                label=lab,
                voxel_count=int(d.size),
                centroid=(
                    float(lat_c[i].mean()),
                    float(lon_c[j].mean()),
                    float(depth_c[d].mean()),
                ),
                depth_range=(float(depth_c[d].min()), float(depth_c[d].max())),
            )
        )
    return fronts


def front_voxels(labeled: LabeledVolume, label: int):
    """Index set of one front as an (M, 3) array of (depth, lat, lon)."""
    return np.argwhere(labeled.labels == label)


def disk_offsets(n: int):
    """Integer offsets of the radius-n circular mask: di^2 + dj^2 <= n^2."""
    r = int(n)
    out = []
    for di in range(-r, r + 1):
        for dj in range(-r, r + 1):
            if di * di + dj * dj <= n * n:
                out.append((di, dj))
    return out


def correspondence_arcs(fronts_t: LabeledVolume, fronts_t1: LabeledVolume, n: int):
    """Label pairs (a, b) with front a at step t within radius n of front b
    at step t+1, measured in lat-lon voxels at constant depth."""
    if fronts_t.grid.volume_shape != fronts_t1.grid.volume_shape:
        raise InvalidInputError("labelings must live on the same grid")
    a = fronts_t.labels
    b = fronts_t1.labels
    nd, nlat, nlon = a.shape
    base = int(b.max()) + 1
    pairs = set()
    for di, dj in disk_offsets(n):
        ai0, ai1 = max(0, di), min(nlat, nlat + di)
        aj0, aj1 = max(0, dj), min(nlon, nlon + dj)
        a_part = a[:, ai0:ai1, aj0:aj1]
        b_part = b[:, ai0 - di : ai1 - di, aj0 - dj : aj1 - dj]
        hit = (a_part > 0) & (b_part > 0)
        if hit.any():
            stacked = a_part[hit].astype(np.int64) * base + b_part[hit]
            for code in np.unique(stacked):
                pairs.add((int(code // base), int(code % base)))
    return sorted(pairs)


def extract_fronts(volume: ScalarVolume, spec: IsovolumeSpec, n: int, time_step: int = 0):
    """Full single-step chain: isovolume, boundary, north-facing, grouping."""
    iso = extract_isovolume(volume, spec)
    bnd = boundary_grid(iso)
    nf = north_facing(bnd, iso)
    return group_fronts(nf, n, time_step)


def _extract_step(shared, t):
    dataset, spec, n = shared
    volume = dataset.load(t, spec.variable)
    labeled, fronts = extract_fronts(volume, spec, n, time_step=t)
    # ship labels back sparsely; fronts are a thin skin on the volume
    flat = labeled.labels.ravel()
    nz = np.flatnonzero(flat)
    return (labeled.labels.shape, nz, flat[nz]), fronts


def _densify(sparse):
    shape, nz, values = sparse
    flat = np.zeros(int(np.prod(shape)), dtype=np.int32)
    flat[nz] = values
    return flat.reshape(shape)


def _arc_step(shared, item):
    dataset, _spec, n = shared
    t, sparse_t, sparse_t1 = item
    grid = dataset.grid.at_time(0)
    lv_t = LabeledVolume(grid, _densify(sparse_t))
    lv_t1 = LabeledVolume(grid, _densify(sparse_t1))
    return [(t, a, b) for a, b in correspondence_arcs(lv_t, lv_t1, n)]


def build_track_graph(dataset, spec: IsovolumeSpec, n: int = 3,
                      time_range: tuple[int, int] | None = None,
                      workers: int = 1) -> TrackGraph:
    """Extract fronts for every step in parallel, then connect them.

    Per-step extraction has no cross-step dependencies and maps onto the
    worker pool directly. Arc computation needs both endpoint steps, so it
    starts only after the extraction phase completes (the pool map is the
    synchronization barrier) and is itself parallel over consecutive
    pairs. The reduction order is fixed, so the graph is identical for any
    worker count.
    """
    t0, t1 = time_range or (0, dataset.n_steps - 1)
    if t1 - t0 + 1 < 2:
        raise InvalidParameterError("tracking needs at least two time steps")
    if not (0 <= t0 <= t1 < dataset.n_steps):
        raise InvalidParameterError(f"time range ({t0}, {t1}) outside the dataset")
    pool = WorkerPool(workers)
    steps = list(range(t0, t1 + 1))
    with pool.session((dataset, spec, n)) as session:
        extracted = session.map(_extract_step, steps)
        # the phase boundary above is the synchronization barrier: every
        # step's fronts exist before any arc pair is attempted
        arc_items = [
            (steps[k], extracted[k][0], extracted[k + 1][0])
            for k in range(len(steps) - 1)
        ]
        arc_chunks = session.map(_arc_step, arc_items)

    vertices = []
    for _sparse, fronts in extracted:
        vertices.extend(fronts)
    arcs = []
    for chunk in arc_chunks:
        arcs.extend(chunk)
    return TrackGraph(vertices, arcs, n)


def longest_tracks(graph: TrackGraph, k: int):
    """The k longest directed paths, by dynamic programming in time order.

    Arcs only connect consecutive steps, so a path of length L ending at
    time t starts at t - L + 1. Ties rank by earlier start time, then by
    smaller labels along the path.
    """
    if k <= 0:
        raise InvalidParameterError("k must be >= 1")
    verts = sorted(graph.vertex_ids())
    if not verts:
        return []
    vset = set(verts)
    best_len = {v: 1 for v in verts}
    best_pred = {v: None for v in verts}
    for (ft, fl, tl) in sorted(graph.arcs):
        u, v = (ft, fl), (ft + 1, tl)
        if u not in vset or v not in vset:
            continue
        cand = best_len[u] + 1
        if cand > best_len[v] or (
            cand == best_len[v] and best_pred[v] is not None and fl < best_pred[v][1]
        ):
            best_len[v] = cand
            best_pred[v] = u

    has_out = {(ft, fl) for ft, fl, _tl in graph.arcs}
    sinks = [v for v in verts if v not in has_out]
    sinks.sort(key=lambda v: (-best_len[v], v[0] - best_len[v] + 1, v[1]))
    tracks = []
    for v in sinks[:k]:
        path = []
        cur = v
        while cur is not None:
            path.append(cur)
            cur = best_pred[cur]
        tracks.append(list(reversed(path)))
    return tracks


def tracks_geojson(graph: TrackGraph, tracks) -> str:
    """Track centroid polylines as a GeoJSON FeatureCollection."""
    by_id = {(v.time_step, v.label): v for v in graph.vertices}
    features = []
    for idx, track in enumerate(tracks):
        coords = [
            [by_id[v].centroid[1], by_id[v].centroid[0]] for v in track
        ]
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coords},
                "properties": {
                    "trackIndex": idx,
                    "length": len(track),
                    "startT": track[0][0],
                    "labels": [v[1] for v in track],
                },
            }
        )
    return json.dumps({"type": "FeatureCollection", "features": features}, indent=2)
