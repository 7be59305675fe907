"""Mesoscale eddy detection from per-slice flow-speed minima.

The swirling speed of a vortex drops toward the center of rotation, so
candidate cores are strict 4-neighborhood minima of the horizontal speed
on each depth slice (vertical velocity is ignored, which also discounts
upwelling and downwelling in the core). Spurious minima are removed by
persistence: a merge tree of the sublevel sets pairs each minimum with the
saddle where its basin merges into a deeper one, and only pairs whose
persistence clears a threshold survive. Candidates are confirmed with a
quadrant-based winding check of a streamline seeded next to the core, and
each confirmed core gets a boundary from a binary search along eight
radial axes for the farthest seed whose streamline still closes on
itself. Depth slices are independent, so detection parallelizes across
them; descriptors stacked within the neighborhood distance across
adjacent depths merge into one eddy column.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateEddyError, InvalidParameterError
from .flow import IntegrationParams, Polyline, streamline
from .grid import EARTH_RADIUS_M, VectorVolume
from .parallel import WorkerPool

_M_PER_DEG = EARTH_RADIUS_M * math.pi / 180.0

RADIAL_AXES = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")
_AXIS_ANGLES = {name: math.pi / 2 - k * math.pi / 4 for k, name in enumerate(RADIAL_AXES)}


@dataclass(frozen=True)
class PersistencePair:
    """A speed minimum paired with the saddle where its basin dies."""

    minimum_index: tuple[int, int]  # (lat, lon) voxel
    birth_value: float
    death_value: float  # inf for the global minimum

    @property
    def persistence(self) -> float:
        return self.death_value - self.birth_value


@dataclass
class EddyDescriptor:
    center: tuple[float, float, float]  # (lon, lat, depth)
    core_speed: float
    boundary_radii: dict  # axis name -> meters
    winding_angle: float
    streamlines: list = field(default_factory=list)
    depth_extent: tuple[float, float] = (0.0, 0.0)
    depth_levels: tuple[int, ...] = ()
    center_voxel: tuple[int, int] = (0, 0)


def _speed_slice(vel: VectorVolume, depth_level: int) -> np.ndarray:
    u = vel.u.values[depth_level]
    v = vel.v.values[depth_level]
    return np.sqrt(u.astype(np.float64) ** 2 + v.astype(np.float64) ** 2)


def _strict_minima(speed: np.ndarray) -> np.ndarray:
    """Boolean mask of strict 4-neighborhood minima (plateaus excluded)."""
    s = speed
    ok = ~np.isnan(s)
    less = np.ones_like(ok)
    big = np.inf
    padded = np.pad(s, 1, constant_values=big)
    padded = np.where(np.isnan(padded), big, padded)
    center = padded[1:-1, 1:-1]
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb = padded[1 + di : 1 + di + s.shape[0], 1 + dj : 1 + dj + s.shape[1]]
        less &= center < nb
    return less & ok


def speed_minima(vel: VectorVolume, depth_level: int) -> list[PersistencePair]:
    """Strict speed minima of one depth slice with merge-tree persistence.

    Voxels are inserted in increasing (value, index) order into a
    union-find structure; when two basins meet, the one born at the higher
    minimum dies at the current saddle value (ties in speed break by voxel
    index). Basins born on plateaus have no strict minimum and die
    silently. The deepest minimum never dies and reports infinite
    persistence.
    """
    speed = _speed_slice(vel, depth_level)
    minima_mask = _strict_minima(speed)
    nlat, nlon = speed.shape
    flat = speed.ravel()
    valid = np.flatnonzero(~np.isnan(flat))
    if valid.size == 0:
        return []
    order = valid[np.lexsort((valid, flat[valid]))]

    parent = {}
    birth = {}  # root -> (value, index) of the component's creating voxel
    rep_min = {}  # root -> flat index of its strict minimum, if any
    pairs = []

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    minima_flat = minima_mask.ravel()
    inserted = np.zeros(flat.size, dtype=bool)
    for idx in order:
        parent[idx] = idx
        birth[idx] = (flat[idx], idx)
        rep_min[idx] = idx if minima_flat[idx] else None
        inserted[idx] = True
        i, j = divmod(int(idx), nlon)
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ni, nj = i + di, j + dj
            if not (0 <= ni < nlat and 0 <= nj < nlon):
                continue
            nidx = ni * nlon + nj
            if not inserted[nidx]:
                continue
            ra, rb = find(idx), find(nidx)
            if ra == rb:
                continue
            # elder rule: the younger basin (larger birth key) dies here
            if birth[ra] > birth[rb]:
                young, old = ra, rb
            else:
                young, old = rb, ra
            if rep_min[young] is not None:
                mi = rep_min[young]
                pairs.append(
                    PersistencePair(
                        (int(mi // nlon), int(mi % nlon)),
                        float(flat[mi]),
                        float(flat[idx]),
                    )
                )
            parent[young] = old

    roots = {find(idx) for idx in order}
    for r in roots:
        if rep_min[r] is not None:
            mi = rep_min[r]
            pairs.append(
                PersistencePair((int(mi // nlon), int(mi % nlon)), float(flat[mi]), math.inf)
            )
    pairs.sort(key=lambda p: (p.birth_value, p.minimum_index))
    return pairs


def simplify_minima(pairs, threshold: float) -> list[PersistencePair]:
    """Drop pairs with persistence below the threshold."""
    if threshold < 0:
        raise InvalidParameterError("persistence threshold must be >= 0")
    return [p for p in pairs if p.persistence >= threshold]


class _Winding:
    """Observer accumulating quadrant visits and signed winding angle
    around a fixed center, in coordinate space."""

    def __init__(self, center, stop_at=None):
        self.cx, self.cy = center
        self.stop_at = stop_at
        self.angle = 0.0
        self.quadrants = set()
        self._prev = None

    def __call__(self, point):
        x = point[0] - self.cx
        y = point[1] - self.cy
        if x != 0.0 and y != 0.0:
            self.quadrants.add((x > 0, y > 0))
        if self._prev is not None:
            px, py = self._prev
            cross = px * y - py * x
            dot = px * x + py * y
            if cross != 0.0 or dot != 0.0:
                self.angle += math.atan2(cross, dot)
        self._prev = (x, y)
        return self.stop_at is not None and abs(self.angle) >= self.stop_at


def winding_test(vel: VectorVolume, center_voxel, params: IntegrationParams,
                 depth_level: int = 0):
    """Quadrant-based rotation check at a candidate core.

    A streamline is seeded one voxel east of the candidate; it passes when
    the polyline crosses into all four quadrants of the candidate-centered
    frame. Returns (passed, winding_angle, reason).
    """
    grid = vel.grid
    i, j = center_voxel
    lat_c = grid.lat.coords
    lon_c = grid.lon.coords
    dlon = lon_c[min(j + 1, lon_c.size - 1)] - lon_c[j] if lon_c.size > 1 else 1.0
    if dlon == 0.0:
        dlon = lon_c[j] - lon_c[j - 1]
    center = (float(lon_c[j]), float(lat_c[i]))
    seed = (center[0] + dlon, center[1], float(grid.depth.coords[depth_level]))
    obs = _Winding(center)
    try:
        streamline(vel, seed, params, observer=obs)
    except Exception as e:  # noqa: BLE001 - failed integration is a test failure
        return False, 0.0, f"integration failed: {e}"
    if len(obs.quadrants) == 4:
        return True, obs.angle, None
    return False, obs.angle, f"visited {len(obs.quadrants)} of 4 quadrants"


def _closed_loop_probe(vel, center, radius_vox, axis, params, depth_level, closure_fraction):
    """Streamline from a radial seed; True when it winds a full turn and
    lands back near its start."""
    grid = vel.grid
    i, j = center
    lat_c, lon_c = grid.lat.coords, grid.lon.coords
    dlat = (lat_c[-1] - lat_c[0]) / max(lat_c.size - 1, 1)
    dlon = (lon_c[-1] - lon_c[0]) / max(lon_c.size - 1, 1)
    theta = _AXIS_ANGLES[axis]
    cx, cy = float(lon_c[j]), float(lat_c[i])
    sx = cx + radius_vox * dlon * math.cos(theta)
    sy = cy + radius_vox * dlat * math.sin(theta)
    obs = _Winding((cx, cy), stop_at=2 * math.pi)
    try:
        poly = streamline(
            vel, (sx, sy, float(grid.depth.coords[depth_level])), params, observer=obs
        )
    except Exception:  # noqa: BLE001
        return False, None
    if abs(obs.angle) < 2 * math.pi:
        return False, None
    start = poly.points[0]
    end = poly.points[-1]
    gap = math.hypot(end[0] - start[0], end[1] - start[1])
    seed_radius = math.hypot(sx - cx, sy - cy)
    return gap <= closure_fraction * seed_radius, poly


def eddy_boundary(vel: VectorVolume, center_voxel, params: IntegrationParams,
                  depth_level: int = 0, r_max: float = 16.0,
                  closure_fraction: float = 0.2, winding_angle: float = 0.0) -> EddyDescriptor:
    """Eddy extent by radial binary search for the last closed streamline.

    Along each of the eight radial axes the seed distance (in voxels) is
    bisected between the innermost passing and outermost failing probe
    until the bracket shrinks to half a voxel; a probe passes when its
    streamline accumulates a full turn around the center and its endpoint
    gap stays within closure_fraction of the seed radius. Raises
    DegenerateEddyError when no axis admits any passing radius.
    """
    grid = vel.grid
    i, j = center_voxel
    radii = {}
    bundle = []
    for axis in RADIAL_AXES:
        lo = 1.0
        ok, poly = _closed_loop_probe(vel, center_voxel, lo, axis, params, depth_level,
                                      closure_fraction)
        if not ok:
            radii[axis] = None
            continue
        best_poly = poly
        hi_ok, hi_poly = _closed_loop_probe(vel, center_voxel, r_max, axis, params,
                                            depth_level, closure_fraction)
        if hi_ok:
            radii[axis] = r_max
            bundle.append(hi_poly)
            continue
        hi = r_max
        while hi - lo > 0.5:
            mid = 0.5 * (lo + hi)
            ok, poly = _closed_loop_probe(vel, center_voxel, mid, axis, params, depth_level,
                                          closure_fraction)
            if ok:
                lo = mid
                best_poly = poly
            else:
                hi = mid
        radii[axis] = lo
        bundle.append(best_poly)
    if all(r is None for r in radii.values()):
        raise DegenerateEddyError(f"no closed-loop radius on any axis at {center_voxel}")

    lat_c, lon_c = grid.lat.coords, grid.lon.coords
    dlat = (lat_c[-1] - lat_c[0]) / max(lat_c.size - 1, 1)
    dlon = (lon_c[-1] - lon_c[0]) / max(lon_c.size - 1, 1)
    radii_m = {}
    for axis, r in radii.items():
        if r is None:
            radii_m[axis] = None
            continue
        theta = _AXIS_ANGLES[axis]
        dx = r * dlon * math.cos(theta)
        dy = r * dlat * math.sin(theta)
        if grid.metric == "cartesian":
            radii_m[axis] = math.hypot(dx, dy)
        else:
            radii_m[axis] = math.hypot(dx * math.cos(math.radians(lat_c[i])), dy) * _M_PER_DEG

    speed = _speed_slice(vel, depth_level)
    depth_val = float(grid.depth.coords[depth_level])
    core = Polyline(np.array([[lon_c[j], lat_c[i], depth_val]]))
    return EddyDescriptor(
        center=(float(lon_c[j]), float(lat_c[i]), depth_val),
        core_speed=float(speed[i, j]),
        boundary_radii=radii_m,
        winding_angle=winding_angle,
        streamlines=[core] + bundle,
        depth_extent=(depth_val, depth_val),
        depth_levels=(depth_level,),
        center_voxel=(int(i), int(j)),
    )


def _detect_slice(shared, depth_level):
    vel, threshold, params, r_max, closure_fraction = shared
    speed = _speed_slice(vel, depth_level)
    finite = speed[~np.isnan(speed)]
    if finite.size == 0:
        return []
    if threshold is None:
        threshold = 0.1 * float(finite.max() - finite.min())
    pairs = simplify_minima(speed_minima(vel, depth_level), threshold)
    found = []
    for pair in pairs:
        passed, angle, _reason = winding_test(vel, pair.minimum_index, params, depth_level)
        if not passed:
            continue
        try:
            desc = eddy_boundary(vel, pair.minimum_index, params, depth_level,
                                 r_max=r_max, closure_fraction=closure_fraction,
                                 winding_angle=angle)
        except DegenerateEddyError:
            continue
        found.append(desc)
    found.sort(key=lambda d: d.center_voxel)
    return found


def detect_eddies(vel: VectorVolume, persistence_threshold: float | None = None,
                  params: IntegrationParams | None = None, n: int = 3,
                  r_max: float = 16.0, closure_fraction: float = 0.2,
                  workers: int = 1) -> list[EddyDescriptor]:
    """Detect eddies on every depth slice and merge them into 3D columns.

    The persistence threshold defaults to 10% of each slice's speed range.
    Slices are processed in parallel; descriptors at the same horizontal
    position within the front-tracking disk distance n across adjacent
    depths merge into one column, reduced in depth order so the result is
    independent of the worker count.
    """
    grid = vel.grid
    nd = len(grid.depth)
    if params is None:
        span = min(
            float(grid.lat.coords[-1] - grid.lat.coords[0]),
            float(grid.lon.coords[-1] - grid.lon.coords[0]),
        )
        params = IntegrationParams(step_size=span / 400.0, max_steps=4000)
    pool = WorkerPool(workers)
    shared = (vel, persistence_threshold, params, r_max, closure_fraction)
    per_slice = pool.map(_detect_slice, shared, range(nd))

    columns: list[EddyDescriptor] = []
    open_cols: list[EddyDescriptor] = []
    for d in range(nd):
        still_open = []
        merged_into = set()
        for desc in per_slice[d]:
            target = None
            for col in open_cols:
                di = desc.center_voxel[0] - col.center_voxel[0]
                dj = desc.center_voxel[1] - col.center_voxel[1]
                if di * di + dj * dj <= n * n and id(col) not in merged_into:
                    target = col
                    break
            if target is None:
                still_open.append(desc)
            else:
                merged_into.add(id(target))
                still_open.append(_merge_column(target, desc))
                open_cols.remove(target)
        # columns not continued at this depth are finished
        columns.extend(open_cols)
        open_cols = still_open
    columns.extend(open_cols)
    columns.sort(key=lambda c: (c.depth_levels[0], c.center_voxel))
    return columns


def _merge_column(col: EddyDescriptor, desc: EddyDescriptor) -> EddyDescriptor:
    # the representative slice is the one with the slowest core
    rep = desc if desc.core_speed < col.core_speed else col
    return EddyDescriptor(
        center=rep.center,
        core_speed=rep.core_speed,
        boundary_radii=rep.boundary_radii,
        winding_angle=rep.winding_angle,
        streamlines=col.streamlines + desc.streamlines,
        depth_extent=(col.depth_extent[0], desc.depth_extent[1]),
        depth_levels=col.depth_levels + desc.depth_levels,
        center_voxel=rep.center_voxel,
    )


def eddies_json(descriptors) -> str:
    import json

    return json.dumps(
        [
            {
                "center": list(d.center),
                "coreSpeed": d.core_speed,
                "depthExtent": list(d.depth_extent),
                "depthLevels": list(d.depth_levels),
                "radii": {k: v for k, v in d.boundary_radii.items()},
                "windingAngle": d.winding_angle,
            }
            for d in descriptors
        ],
        indent=2,
        sort_keys=True,
    )


def eddies_geojson(descriptors, metric="spherical") -> str:
    from .flow import polylines_geojson

    polys = []
    for d in descriptors:
        polys.extend(d.streamlines)
    return polylines_geojson(polys, metric=metric)
