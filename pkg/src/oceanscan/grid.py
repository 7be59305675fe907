"""Rectilinear (time, depth, lat, lon) data model and derived fields.

All feature extractors operate on immutable volumes carrying a NaN land
mask. Conventions: depth in meters, positive down; latitude/longitude in
degrees; time in days from the first record. Synthetic test grids may opt
out of spherical geometry by constructing the grid with
``metric="cartesian"``, in which case lat/lon coordinates are treated as
plain y/x distances in meters.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidInputError,
    InvalidParameterError,
    OutOfDomainError,
    ValidationError,
)

AXIS_NAMES = ("time", "depth", "lat", "lon")

EARTH_RADIUS_M = 6_371_000.0

#: meters per degree of latitude (and of longitude at the equator)
_M_PER_DEG = EARTH_RADIUS_M * np.pi / 180.0

SPEED = "speed"
VORTICITY = "vorticity"
CURL_MAGNITUDE = "curl"
OKUBO_WEISS = "okubo_weiss"

DERIVED_KINDS = (SPEED, VORTICITY, CURL_MAGNITUDE, OKUBO_WEISS)


def _frozen(arr, dtype=None):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GridAxis:
    """One coordinate axis, strictly increasing."""

    name: str
    coords: np.ndarray

    def __eq__(self, other):
        return (
            isinstance(other, GridAxis)
            and self.name == other.name
            and np.array_equal(self.coords, other.coords)
        )

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise InvalidParameterError(f"unknown axis name {self.name!r}")
        coords = _frozen(self.coords, dtype=np.float64)
        if coords.ndim != 1 or coords.size < 1:
            raise InvalidParameterError(f"axis {self.name}: need a 1D array with >= 1 coordinate")
        if not np.all(np.isfinite(coords)):
            raise InvalidParameterError(f"axis {self.name}: coordinates must be finite")
        if coords.size > 1 and not np.all(np.diff(coords) > 0):
            raise InvalidParameterError(f"axis {self.name}: coordinates must be strictly increasing")
        object.__setattr__(self, "coords", coords)

    def __len__(self):
        return self.coords.size


@dataclass(frozen=True, eq=False)
class Grid4D:
    """Rectilinear grid over (time, depth, lat, lon)."""

    time: GridAxis
    depth: GridAxis
    lat: GridAxis
    lon: GridAxis
    metric: str = "spherical"

    def __eq__(self, other):
        return (
            isinstance(other, Grid4D)
            and self.metric == other.metric
            and all(getattr(self, n) == getattr(other, n) for n in AXIS_NAMES)
        )

    def same_horizontal(self, other: "Grid4D") -> bool:
        return self.lat == other.lat and self.lon == other.lon and self.depth == other.depth

    def __post_init__(self):
        for name in AXIS_NAMES:
            ax = getattr(self, name)
            if ax.name != name:
                raise InvalidParameterError(f"axis in slot {name!r} is named {ax.name!r}")
        if self.metric not in ("spherical", "cartesian"):
            raise InvalidParameterError(f"unknown metric {self.metric!r}")

    @property
    def shape(self):
        return (len(self.time), len(self.depth), len(self.lat), len(self.lon))

    @property
    def volume_shape(self):
        """Shape of a single-time-step volume: (D, NLat, NLon)."""
        return self.shape[1:]

    def at_time(self, t: int) -> "Grid4D":
        """Grid restricted to one time index."""
        nt = len(self.time)
        if not 0 <= t < nt:
            raise OutOfDomainError(f"time index {t} outside [0, {nt})")
        return Grid4D(
            GridAxis("time", self.time.coords[t : t + 1]),
            self.depth,
            self.lat,
            self.lon,
            metric=self.metric,
        )

    @staticmethod
    def from_coords(time, depth, lat, lon, metric="spherical") -> "Grid4D":
        return Grid4D(
            GridAxis("time", np.atleast_1d(time)),
            GridAxis("depth", np.atleast_1d(depth)),
            GridAxis("lat", np.atleast_1d(lat)),
            GridAxis("lon", np.atleast_1d(lon)),
            metric=metric,
        )


@dataclass(frozen=True)
class ScalarVolume:
    """One scalar field at one time step. NaN marks land."""

    grid: Grid4D
    values: np.ndarray
    name: str = "scalar"

    def __post_init__(self):
        if len(self.grid.time) != 1:
            raise InvalidInputError("ScalarVolume grid must be restricted to one time index")
        values = np.asarray(self.values)
        if values.dtype not in (np.float32, np.float64):
            values = values.astype(np.float64)
        if values.shape != self.grid.volume_shape:
            raise InvalidInputError(
                f"values shape {values.shape} does not match grid {self.grid.volume_shape}"
            )
        if np.isinf(values).any():
            raise InvalidInputError("non-NaN values must be finite (no +/-Inf)")
        values = values.copy() if values.base is not None or values.flags.writeable else values
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def ocean_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def with_values(self, values, name=None) -> "ScalarVolume":
        return ScalarVolume(self.grid, values, name or self.name)


@dataclass(frozen=True)
class VectorVolume:
    """Horizontal velocity (u east, v north, m/s) with optional vertical w.

    The vertical component follows the depth axis: positive w points down.
    """

    u: ScalarVolume
    v: ScalarVolume
    w: ScalarVolume | None = None

    def __post_init__(self):
        comps = [self.u, self.v] + ([self.w] if self.w is not None else [])
        g = self.u.grid
        for c in comps[1:]:
            if c.grid != g:
                raise InvalidInputError("velocity components must share one grid")
        mask = np.isnan(self.u.values)
        for c in comps[1:]:
            if not np.array_equal(mask, np.isnan(c.values)):
                raise InvalidInputError("velocity components must share one NaN land mask")

    @property
    def grid(self) -> Grid4D:
        return self.u.grid


@dataclass(frozen=True)
class ResampleSpec:
    """Regular-grid target: depth levels every depth_step up to max_depth,
    horizontal resolution 1/(12*factor) degrees."""

    depth_step: float
    max_depth: float
    factor: int = 1

    def __post_init__(self):
        if self.depth_step <= 0 or self.max_depth <= 0:
            raise InvalidParameterError("depth_step and max_depth must be positive")
        if not (isinstance(self.factor, (int, np.integer)) and self.factor >= 1):
            raise InvalidParameterError("factor must be a positive integer")
        ratio = self.max_depth / self.depth_step
        if abs(ratio - round(ratio)) > 1e-9:
            raise InvalidParameterError("max_depth must be divisible by depth_step")

    @property
    def levels(self) -> int:
        return int(round(self.max_depth / self.depth_step))

    @property
    def horizontal_spacing(self) -> float:
        return 1.0 / (12.0 * self.factor)


def interp_weights(coords: np.ndarray, targets, tol: float = 1e-9):
    """Bracketing indices and weights for 1D linear interpolation.

    Targets within ``tol`` of a node collapse onto that node (ilo == ihi,
    weight 0) so exact hits copy values through bit-for-bit and take no NaN
    from the unused neighbor. Raises OutOfDomainError outside the axis.
    """
    coords = np.asarray(coords, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    n = coords.size
    if t.size and not np.all(np.isfinite(t)):
        raise OutOfDomainError("interpolation targets must be finite")
    if t.size and (t.min() < coords[0] - tol or t.max() > coords[-1] + tol):
        raise OutOfDomainError(
            f"target range [{t.min()}, {t.max()}] outside axis [{coords[0]}, {coords[-1]}]"
        )
    if n == 1:
        z = np.zeros(t.shape, dtype=np.intp)
        return z, z.copy(), np.zeros(t.shape)
    hi = np.clip(np.searchsorted(coords, t), 1, n - 1)
    lo = hi - 1
    w = (t - coords[lo]) / (coords[hi] - coords[lo])
    snap_lo = np.abs(t - coords[lo]) <= tol
    snap_hi = np.abs(t - coords[hi]) <= tol
    lo = np.where(snap_hi, hi, lo)
    hi = np.where(snap_lo, lo, hi)
    w = np.where(snap_lo | snap_hi, 0.0, w)
    return lo, hi, w


def _lerp_axis(arr, lo, hi, w, axis):
    a = np.take(arr, lo, axis=axis)
    b = np.take(arr, hi, axis=axis)
    shape = [1] * a.ndim
    shape[axis] = w.size
    wb = w.reshape(shape)
    return a + (b - a) * wb


def resample_regular(volume: ScalarVolume, spec: ResampleSpec) -> ScalarVolume:
    """Trilinear resampling onto regular depth levels and uniform lat/lon.

    Output depths are {step, 2*step, ..., max_depth}; the horizontal grid
    keeps the source origin with uniform 1/(12*factor) degree spacing. Any
    interpolation stencil touching NaN yields NaN. When the source grid
    already matches the target the volume passes through bit-for-bit.
    """
    g = volume.grid
    src_depth = g.depth.coords
    tol = 1e-9
    # every target level must be interpolable: the first target sits at
    # depth_step, so a source starting at 0 or at depth_step both qualify
    if src_depth[0] > spec.depth_step + tol or src_depth[-1] < spec.max_depth - tol:
        raise OutOfDomainError(
            f"source depth axis [{src_depth[0]}, {src_depth[-1]}] does not cover "
            f"target levels [{spec.depth_step}, {spec.max_depth}]"
        )
    tgt_depth = spec.depth_step * np.arange(1, spec.levels + 1)
    step = spec.horizontal_spacing
    tgt_lat = _regular_within(g.lat.coords, step)
    tgt_lon = _regular_within(g.lon.coords, step)

    # reuse source coordinate arrays when they already match, so resampling
    # an already-regular grid is the identity
    tgt_depth = _snap_axis(tgt_depth, src_depth)
    tgt_lat = _snap_axis(tgt_lat, g.lat.coords)
    tgt_lon = _snap_axis(tgt_lon, g.lon.coords)

    out = volume.values
    for axis, (coords, targets) in enumerate(
        [(src_depth, tgt_depth), (g.lat.coords, tgt_lat), (g.lon.coords, tgt_lon)]
    ):
        lo, hi, w = interp_weights(coords, targets)
        out = _lerp_axis(out, lo, hi, w, axis)
    out = out.astype(volume.values.dtype, copy=False)
    new_grid = Grid4D.from_coords(g.time.coords, tgt_depth, tgt_lat, tgt_lon, metric=g.metric)
    return ScalarVolume(new_grid, out, volume.name)


def _regular_within(coords, step):
    span = coords[-1] - coords[0]
    count = int(np.floor(span / step + 1e-9)) + 1
    return coords[0] + step * np.arange(count)


def _snap_axis(target, source):
    if target.size == source.size and np.max(np.abs(target - source)) <= 1e-9:
        return source
    return target


def _axis_derivative(values, coords, axis):
    """d(values)/d(coord): central differences inside, one-sided first-order
    at the two edges, NaN wherever the stencil reads NaN."""
    f = np.moveaxis(values.astype(np.float64, copy=False), axis, -1)
    x = coords
    out = np.full(f.shape, np.nan)
    if f.shape[-1] >= 2:
        out[..., 0] = (f[..., 1] - f[..., 0]) / (x[1] - x[0])
        out[..., -1] = (f[..., -1] - f[..., -2]) / (x[-1] - x[-2])
    if f.shape[-1] >= 3:
        out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (x[2:] - x[:-2])
    return np.moveaxis(out, -1, axis)


def _metric_scales(grid: Grid4D):
    """Meters per coordinate degree along lon (per latitude row) and lat.

    In cartesian metric the coordinates already are meters, so both scale
    factors are 1.
    """
    if grid.metric == "cartesian":
        nlat = len(grid.lat)
        return np.ones(nlat), 1.0
    coslat = np.cos(np.deg2rad(grid.lat.coords))
    return _M_PER_DEG * coslat, _M_PER_DEG


def derived_field(vel: VectorVolume, kind: str) -> ScalarVolume:
    """Scalar field derived from horizontal velocity.

    speed        sqrt(u^2 + v^2), computed in the input dtype
    vorticity    dv/dx - du/dy
    curl         |vorticity| for horizontal flow
    okubo_weiss  sn^2 + ss^2 - vorticity^2 with sn = du/dx - dv/dy and
                 ss = dv/dx + du/dy

    Derivatives are in physical units (1/s): central differences in the
    interior, one-sided at edges, with dx = R cos(lat) dlon and dy = R dlat
    on spherical grids. NaN propagates through every stencil.
    """
    if vel.u is None or vel.v is None:
        raise InvalidInputError("derived fields require both u and v")
    if kind not in DERIVED_KINDS:
        raise InvalidParameterError(f"unknown derived field kind {kind!r}")
    u, v = vel.u.values, vel.v.values
    if kind == SPEED:
        out = np.sqrt(u * u + v * v)
        return ScalarVolume(vel.grid, out, SPEED)

    grid = vel.grid
    lon_scale, lat_scale = _metric_scales(grid)
    rows = lon_scale[None, :, None]
    du_dx = _axis_derivative(u, grid.lon.coords, axis=2) / rows
    dv_dx = _axis_derivative(v, grid.lon.coords, axis=2) / rows
    du_dy = _axis_derivative(u, grid.lat.coords, axis=1) / lat_scale
    dv_dy = _axis_derivative(v, grid.lat.coords, axis=1) / lat_scale
    vort = dv_dx - du_dy
    if kind == VORTICITY:
        out = vort
    elif kind == CURL_MAGNITUDE:
        out = np.abs(vort)
    else:
        sn = du_dx - dv_dy
        ss = dv_dx + du_dy
        out = sn * sn + ss * ss - vort * vort
    out = np.where(np.isnan(u) | np.isnan(v), np.nan, out)
    return ScalarVolume(vel.grid, out, kind)


def clip_to_box(coords, lo, hi):
    """Index slice selecting coords within [lo, hi] (inclusive)."""
    if lo > hi:
        raise ValidationError(f"empty selection [{lo}, {hi}]")
    i0 = int(np.searchsorted(coords, lo - 1e-12, side="left"))
    i1 = int(np.searchsorted(coords, hi + 1e-12, side="right"))
    return slice(i0, i1)
