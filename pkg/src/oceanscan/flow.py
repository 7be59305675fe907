"""Seed placement and fieldline integration.

Streamlines advect through the horizontal velocity of a single time step
with fourth-order Runge-Kutta steps of fixed arc length, staying on the
seed's depth level (vertical velocity is excluded; it is orders of
magnitude smaller than the horizontal flow and per-level independence is
what makes depth-slab parallelism cheap). Pathlines advance particles in
physical time through the velocity interpolated linearly between
preloaded time steps, using the vertical component when present.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateWeightsError,
    InvalidInputError,
    InvalidParameterError,
    InvalidSeedError,
)
from .grid import (
    DERIVED_KINDS,
    EARTH_RADIUS_M,
    ScalarVolume,
    VectorVolume,
    derived_field,
)

_DEG_PER_M = 180.0 / (np.pi * EARTH_RADIUS_M)

FORWARD = "forward"
BACKWARD = "backward"
BOTH = "both"


@dataclass(frozen=True)
class Region:
    """Inclusive lat/lon/depth box restricting seed placement."""

    lon: tuple[float, float] | None = None
    lat: tuple[float, float] | None = None
    depth: tuple[float, float] | None = None


@dataclass(frozen=True)
class SeedSpec:
    count: int
    strategy: str = "uniform"  # uniform | speed | vorticity | curl | okubo_weiss | scalar:NAME
    region: Region | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise InvalidParameterError("seed count must be >= 1")
        ok = self.strategy == "uniform" or self.strategy in DERIVED_KINDS
        if not ok and not self.strategy.startswith("scalar:"):
            raise InvalidParameterError(f"unknown seeding strategy {self.strategy!r}")


@dataclass(frozen=True)
class IntegrationParams:
    step_size: float  # arc length per step, coordinate degrees
    max_steps: int = 1000
    direction: str = FORWARD
    termination_speed: float = 1e-8  # m/s

    def __post_init__(self):
        if self.step_size <= 0:
            raise InvalidParameterError("step_size must be positive")
        if self.max_steps < 1:
            raise InvalidParameterError("max_steps must be >= 1")
        if self.direction not in (FORWARD, BACKWARD, BOTH):
            raise InvalidParameterError(f"unknown direction {self.direction!r}")


@dataclass
class Polyline:
    """Integrated curve: points are (lon, lat, depth) rows."""

    points: np.ndarray
    seed_index: int = 0
    times: np.ndarray | None = None
    speeds: np.ndarray | None = None


# -- seed placement ----------------------------------------------------------

def _weight_field(source, spec: SeedSpec) -> ScalarVolume:
    if spec.strategy == "uniform":
        raise InvalidParameterError("uniform strategy carries no weight field")
    if spec.strategy.startswith("scalar:"):
        if not isinstance(source, ScalarVolume):
            raise InvalidInputError("scalar weighting needs the named scalar volume")
        return source
    if not isinstance(source, VectorVolume):
        raise InvalidInputError(f"{spec.strategy} weighting needs a velocity volume")
    return derived_field(source, spec.strategy)


def _region_mask(grid, region: Region | None):
    nd, nlat, nlon = grid.volume_shape
    mask = np.ones((nd, nlat, nlon), dtype=bool)
    if region is None:
        return mask
    for axis_idx, (coords, bounds) in enumerate(
        [(grid.depth.coords, region.depth), (grid.lat.coords, region.lat), (grid.lon.coords, region.lon)]
    ):
        if bounds is None:
            continue
        inside = (coords >= bounds[0]) & (coords <= bounds[1])
        shape = [1, 1, 1]
        shape[axis_idx] = coords.size
        mask &= inside.reshape(shape)
    return mask


def _cell_edges(coords):
    """Voxel boundaries: midpoints between nodes, clamped to the axis at
    the two ends so every jittered seed stays inside the domain."""
    if coords.size == 1:
        return np.array([coords[0], coords[0]])
    mid = 0.5 * (coords[:-1] + coords[1:])
    return np.concatenate([[coords[0]], mid, [coords[-1]]])


def place_seeds(source, spec: SeedSpec):
    """Sample seed points, uniformly over ocean voxels or weighted.

    Weighted sampling draws voxel indices with probability proportional to
    max(weight, 0) (NaN counts as 0) and jitters each seed uniformly
    within its voxel. Fixed rng_seed gives bit-reproducible output; the
    whole placement is a single serial pass regardless of worker count.

    Returns (points, voxel_indices): an (N, 3) array of (lon, lat, depth)
    plus the (N, 3) integer (d, i, j) voxel of each seed.
    """
    if isinstance(source, VectorVolume):
        grid = source.grid
        finite = ~np.isnan(source.u.values)
    else:
        grid = source.grid
        finite = ~np.isnan(source.values)
    rng = np.random.default_rng(spec.rng_seed)
    region = _region_mask(grid, spec.region)
    nd, nlat, nlon = grid.volume_shape

    if spec.strategy == "uniform":
        candidates = finite & region
        if not candidates.any():
            raise DegenerateWeightsError("no ocean voxels available for seeding")
        flat = candidates.ravel()
        picks = np.empty(spec.count, dtype=np.int64)
        got = 0
        while got < spec.count:
            draw = rng.integers(0, flat.size, size=2 * (spec.count - got))
            keep = draw[flat[draw]][: spec.count - got]
            picks[got : got + keep.size] = keep
            got += keep.size
    else:
        weights = _weight_field(source, spec).values.astype(np.float64)
        weights = np.where(np.isnan(weights), 0.0, np.maximum(weights, 0.0))
        weights = np.where(region & finite, weights, 0.0)
        total = weights.sum()
        if not total > 0:
            raise DegenerateWeightsError("weight field carries no positive mass")
        flat_w = weights.ravel() / total
        picks = rng.choice(flat_w.size, size=spec.count, p=flat_w)

    d, i, j = np.unravel_index(picks, (nd, nlat, nlon))
    edges = [_cell_edges(c) for c in (grid.depth.coords, grid.lat.coords, grid.lon.coords)]
    u = rng.random((3, spec.count))
    depth = edges[0][d] + u[0] * (edges[0][d + 1] - edges[0][d])
    lat = edges[1][i] + u[1] * (edges[1][i + 1] - edges[1][i])
    lon = edges[2][j] + u[2] * (edges[2][j + 1] - edges[2][j])
    points = np.column_stack([lon, lat, depth])
    return points, np.column_stack([d, i, j])


# -- field sampling ----------------------------------------------------------

class _SliceSampler:
    """Bilinear (lat, lon) velocity sampler on one depth level.

    Uses direct index arithmetic on uniform axes; any NaN corner makes the
    sample NaN. Positions outside the axis bounds return None.
    """

    def __init__(self, u2d, v2d, lat, lon):
        self.u = u2d
        self.v = v2d
        self.lat = lat
        self.lon = lon
        self.lat0, self.lon0 = lat[0], lon[0]
        self.dlat = (lat[-1] - lat[0]) / (lat.size - 1) if lat.size > 1 else 1.0
        self.dlon = (lon[-1] - lon[0]) / (lon.size - 1) if lon.size > 1 else 1.0
        self.uniform = (
            lat.size < 2 or np.allclose(np.diff(lat), self.dlat, rtol=0, atol=1e-9)
        ) and (lon.size < 2 or np.allclose(np.diff(lon), self.dlon, rtol=0, atol=1e-9))

    def __call__(self, lon, lat):
        if not (self.lat0 <= lat <= self.lat[-1] and self.lon0 <= lon <= self.lon[-1]):
            return None
        if self.uniform:
            fi = (lat - self.lat0) / self.dlat
            fj = (lon - self.lon0) / self.dlon
            i = min(int(fi), self.lat.size - 2) if self.lat.size > 1 else 0
            j = min(int(fj), self.lon.size - 2) if self.lon.size > 1 else 0
            wi = fi - i
            wj = fj - j
        else:
            i = min(int(np.searchsorted(self.lat, lat, side="right")) - 1, self.lat.size - 2)
            j = min(int(np.searchsorted(self.lon, lon, side="right")) - 1, self.lon.size - 2)
            i = max(i, 0)
            j = max(j, 0)
            wi = (lat - self.lat[i]) / (self.lat[i + 1] - self.lat[i]) if self.lat.size > 1 else 0.0
            wj = (lon - self.lon[j]) / (self.lon[j + 1] - self.lon[j]) if self.lon.size > 1 else 0.0
        i1 = i + 1 if self.lat.size > 1 else i
        j1 = j + 1 if self.lon.size > 1 else j
        u = self.u
        v = self.v
        u00, u01, u10, u11 = u[i, j], u[i, j1], u[i1, j], u[i1, j1]
        v00, v01, v10, v11 = v[i, j], v[i, j1], v[i1, j], v[i1, j1]
        us = (1 - wi) * ((1 - wj) * u00 + wj * u01) + wi * ((1 - wj) * u10 + wj * u11)
        vs = (1 - wi) * ((1 - wj) * v00 + wj * v01) + wi * ((1 - wj) * v10 + wj * v11)
        if math.isnan(us) or math.isnan(vs):
            return None
        return us, vs


def _coord_velocity(u, v, lat, metric):
    """Physical m/s to coordinate units per second."""
    if metric == "cartesian":
        return u, v
    coslat = math.cos(math.radians(lat))
    if abs(coslat) < 1e-6:
        coslat = 1e-6
    return u * _DEG_PER_M / coslat, v * _DEG_PER_M


def nearest_depth_level(grid, depth: float) -> int:
    return int(np.argmin(np.abs(grid.depth.coords - depth)))


def streamline(vel: VectorVolume, seed, params: IntegrationParams,
               seed_index: int = 0, observer=None) -> Polyline:
    """Trace one streamline from a (lon, lat, depth) seed.

    The seed snaps to the nearest depth level and integration stays in
    that slice. Each RK4 step follows the unit direction of the local
    coordinate velocity, so one step advances step_size along the curve.
    Termination: max_steps, leaving the domain, entering NaN, or physical
    speed below termination_speed. The observer, when given, sees every
    accepted point and may stop the trace by returning True.
    """
    lon0, lat0, depth0 = float(seed[0]), float(seed[1]), float(seed[2])
    grid = vel.grid
    level = nearest_depth_level(grid, depth0)
    depth_val = float(grid.depth.coords[level])
    sampler = _SliceSampler(
        vel.u.values[level], vel.v.values[level], grid.lat.coords, grid.lon.coords
    )
    first = sampler(lon0, lat0)
    if first is None:
        raise InvalidSeedError(f"seed ({lon0}, {lat0}) on land or outside the domain")

    if params.direction == BOTH:
        back = _trace(sampler, grid.metric, (lon0, lat0), depth_val, params, -1.0, observer)
        fwd = _trace(sampler, grid.metric, (lon0, lat0), depth_val, params, +1.0, observer)
        pts = np.vstack([back.points[::-1], fwd.points[1:]])
        speeds = np.concatenate([back.speeds[::-1], fwd.speeds[1:]])
        return Polyline(pts, seed_index, speeds=speeds)
    sign = -1.0 if params.direction == BACKWARD else 1.0
    out = _trace(sampler, grid.metric, (lon0, lat0), depth_val, params, sign, observer)
    out.seed_index = seed_index
    return out


def _trace(sampler, metric, start, depth_val, params, sign, observer):
    h = params.step_size
    lon, lat = start
    pts = [(lon, lat, depth_val)]
    uv = sampler(lon, lat)
    speeds = [math.hypot(*uv)]
    if observer is not None:
        observer((lon, lat))

    def direction(p_lon, p_lat):
        s = sampler(p_lon, p_lat)
        if s is None:
            return None
        cu, cv = _coord_velocity(s[0], s[1], p_lat, metric)
        norm = math.hypot(cu, cv)
        if norm == 0.0:
            return None
        return sign * cu / norm, sign * cv / norm

    for _ in range(params.max_steps):
        uv = sampler(lon, lat)
        if uv is None or math.hypot(*uv) < params.termination_speed:
            break
        k1 = direction(lon, lat)
        if k1 is None:
            break
        k2 = direction(lon + 0.5 * h * k1[0], lat + 0.5 * h * k1[1])
        if k2 is None:
            break
        k3 = direction(lon + 0.5 * h * k2[0], lat + 0.5 * h * k2[1])
        if k3 is None:
            break
        k4 = direction(lon + h * k3[0], lat + h * k3[1])
        if k4 is None:
            break
        nlon = lon + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        nlat = lat + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        uv = sampler(nlon, nlat)
        if uv is None:
            break
        lon, lat = nlon, nlat
        pts.append((lon, lat, depth_val))
        speeds.append(math.hypot(*uv))
        if observer is not None and observer((lon, lat)):
            break
    return Polyline(np.array(pts), speeds=np.array(speeds))


def streamlines(vel: VectorVolume, seeds, params: IntegrationParams, workers: int = 1):
    """Integrate many seeds; results ordered by seed index.

    Seeds whose very first sample reads NaN (jittered against a coastline)
    yield a single-point polyline instead of aborting the batch.
    """
    from .parallel import WorkerPool

    pool = WorkerPool(workers)
    tasks = [(np.asarray(seed), idx) for idx, seed in enumerate(seeds)]
    return pool.map(_streamline_task, (vel, params), tasks)


def _streamline_task(shared, task):
    vel, params = shared
    seed, idx = task
    try:
        return streamline(vel, seed, params, seed_index=idx)
    except InvalidSeedError:
        return Polyline(np.asarray([seed[:3]], dtype=float), idx,
                        speeds=np.array([0.0]))


# -- pathlines ---------------------------------------------------------------

class _TimeSampler:
    """Velocity interpolated trilinearly in space and linearly in time."""

    def __init__(self, volumes, grid, times):
        self.grid = grid
        self.times = times
        self.u = np.stack([v.u.values for v in volumes])
        self.v = np.stack([v.v.values for v in volumes])
        self.w = (
            np.stack([v.w.values for v in volumes]) if volumes[0].w is not None else None
        )

    def __call__(self, t_days, lon, lat, depth):
        times = self.times
        if not (times[0] <= t_days <= times[-1]):
            return None
        k = min(int(np.searchsorted(times, t_days, side="right")) - 1, times.size - 2)
        k = max(k, 0)
        if times.size == 1:
            k, wt = 0, 0.0
        else:
            wt = (t_days - times[k]) / (times[k + 1] - times[k])
        a = self._sample_spatial(k, lon, lat, depth)
        if a is None:
            return None
        if wt == 0.0:
            return a
        b = self._sample_spatial(k + 1, lon, lat, depth)
        if b is None:
            return None
        return tuple((1 - wt) * x + wt * y for x, y in zip(a, b))

    def _sample_spatial(self, k, lon, lat, depth):
        g = self.grid
        from .errors import OutOfDomainError
        from .grid import interp_weights

        try:
            dlo, dhi, wd = (x.item() for x in interp_weights(g.depth.coords, [depth]))
            ilo, ihi, wi = (x.item() for x in interp_weights(g.lat.coords, [lat]))
            jlo, jhi, wj = (x.item() for x in interp_weights(g.lon.coords, [lon]))
        except OutOfDomainError:
            return None
        out = []
        comps = [self.u, self.v] + ([self.w] if self.w is not None else [])
        for arr in comps:
            c = arr[k]
            v = 0.0
            # zero-weight corners coincide with their partner voxel, so NaN
            # only enters through corners that actually contribute
            for dz, wz in ((dlo, 1 - wd), (dhi, wd)):
                for iy, wy in ((ilo, 1 - wi), (ihi, wi)):
                    for jx, wx in ((jlo, 1 - wj), (jhi, wj)):
                        v += wz * wy * wx * c[dz, iy, jx]
            out.append(v)
        if any(math.isnan(x) for x in out):
            return None
        if self.w is None:
            out.append(0.0)
        return tuple(out)


def pathlines(dataset, seeds, params: IntegrationParams,
              time_range: tuple[int, int] | None = None,
              u="u", v="v", w=None, workers: int = 1):
    """Trace particles through the time-varying field.

    All velocity steps in the range are preloaded before integration
    begins so the per-seed work is compute-only. Substeps per interval are
    sized so one substep moves about step_size coordinate units at the
    fastest observed flow, which keeps RK4 stage times aligned with the
    kinks of the piecewise-linear time interpolation. Per-point times (in
    days) are recorded on every polyline.
    """
    t0, t1 = time_range or (0, dataset.n_steps - 1)
    if t1 - t0 + 1 < 2:
        raise InvalidParameterError("pathlines need at least two time steps")
    volumes = [dataset.load_vector(t, u, v, w) for t in range(t0, t1 + 1)]
    times = dataset.grid.time.coords[t0 : t1 + 1]
    grid = dataset.grid.at_time(t0)
    sampler = _TimeSampler(volumes, grid, times)

    vmax = 0.0
    for vol in volumes:
        speed = np.sqrt(vol.u.values**2 + vol.v.values**2)
        m = np.nanmax(speed)
        if np.isfinite(m):
            vmax = max(vmax, float(m))
    if grid.metric == "cartesian":
        vmax_coord = vmax
    else:
        vmax_coord = vmax * _DEG_PER_M  # worst case at the equator
    interval_days = float(np.min(np.diff(times)))
    arc_per_interval = vmax_coord * interval_days * 86400.0
    substeps = max(1, int(math.ceil(arc_per_interval / params.step_size)))

    from .parallel import WorkerPool

    pool = WorkerPool(workers)
    tasks = [(np.asarray(seed), idx) for idx, seed in enumerate(seeds)]
    return pool.map(_pathline_task, (sampler, params, substeps), tasks)


def _pathline_task(shared, task):
    sampler, params, substeps = shared
    seed, idx = task
    try:
        return _trace_pathline(sampler, seed, params, substeps, idx)
    except InvalidSeedError:
        return Polyline(np.asarray([seed[:3]], dtype=float), idx,
                        times=np.array([float(sampler.times[0])]))


def _trace_pathline(sampler: _TimeSampler, seed, params, substeps, seed_index):
    lon, lat, depth = (float(x) for x in seed[:3])
    times = sampler.times
    metric = sampler.grid.metric
    t = float(times[0])
    vel0 = sampler(t, lon, lat, depth)
    if vel0 is None:
        raise InvalidSeedError(f"seed ({lon}, {lat}, {depth}) on land or outside the domain")
    pts = [(lon, lat, depth)]
    ts = [t]
    steps = 0

    def rhs(tq, plon, plat, pdepth):
        s = sampler(tq, plon, plat, pdepth)
        if s is None:
            return None
        cu, cv = _coord_velocity(s[0], s[1], plat, metric)
        return cu, cv, s[2]

    done = False
    for k in range(times.size - 1):
        dt_days = (times[k + 1] - times[k]) / substeps
        dt = dt_days * 86400.0
        for _ in range(substeps):
            if steps >= params.max_steps:
                done = True
                break
            k1 = rhs(t, lon, lat, depth)
            if k1 is None:
                done = True
                break
            k2 = rhs(t + 0.5 * dt_days, lon + 0.5 * dt * k1[0], lat + 0.5 * dt * k1[1],
                     depth + 0.5 * dt * k1[2])
            k3 = (
                rhs(t + 0.5 * dt_days, lon + 0.5 * dt * k2[0], lat + 0.5 * dt * k2[1],
                    depth + 0.5 * dt * k2[2]) if k2 else None
            )
            k4 = (
                rhs(t + dt_days, lon + dt * k3[0], lat + dt * k3[1], depth + dt * k3[2])
                if k3 else None
            )
            if k2 is None or k3 is None or k4 is None:
                done = True
                break
            lon += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            lat += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            depth += dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
            t += dt_days
            if sampler(t, lon, lat, depth) is None:
                done = True
                break
            pts.append((lon, lat, depth))
            ts.append(t)
            steps += 1
        if done:
            break
    return Polyline(np.array(pts), seed_index, times=np.array(ts))


# -- export ------------------------------------------------------------------

def _polyline_length_m(poly: Polyline, metric: str) -> float:
    p = poly.points
    if p.shape[0] < 2:
        return 0.0
    d = np.diff(p[:, :2], axis=0)
    if metric == "cartesian":
        seg = np.hypot(d[:, 0], d[:, 1])
    else:
        mid_lat = 0.5 * (p[:-1, 1] + p[1:, 1])
        dx = d[:, 0] * np.cos(np.deg2rad(mid_lat)) / _DEG_PER_M
        dy = d[:, 1] / _DEG_PER_M
        seg = np.hypot(dx, dy)
    return float(seg.sum())


def polylines_geojson(polys, metric="spherical") -> str:
    """GeoJSON LineString collection with seedIndex/length/meanSpeed."""
    features = []
    for poly in polys:
        mean_speed = float(np.mean(poly.speeds)) if poly.speeds is not None else None
        props = {
            "seedIndex": int(poly.seed_index),
            "length": _polyline_length_m(poly, metric),
            "meanSpeed": mean_speed,
        }
        if poly.times is not None:
            props["times"] = [float(t) for t in poly.times]
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [[float(p[0]), float(p[1]), float(p[2])] for p in poly.points],
                },
                "properties": props,
            }
        )
    return json.dumps({"type": "FeatureCollection", "features": features}, indent=2)
