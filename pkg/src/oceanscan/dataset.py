"""Dataset ingestion: NetCDF readers, the raw internal format, clipping.

A dataset handle is lazy: axes and variable names are read at open time,
volumes are materialized per (time step, variable) on demand. Handles are
picklable so worker processes can load their own time steps; open file
objects never cross process boundaries. Every load call is timed and
appended to ``load_log`` for the I/O benchmark.

The raw internal format is a directory with a ``header.json`` (axes,
shape, variable names, fill convention) plus one little-endian float32
blob per variable per time step, row-major (depth, lat, lon).
"""
from __future__ import annotations

import json
import threading
import time as _time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BoundsError,
    FormatError,
    InvalidParameterError,
    ValidationError,
    VariableNotFoundError,
)
from .grid import Grid4D, ScalarVolume, VectorVolume, clip_to_box

RAW_HEADER = "header.json"
RAW_FORMAT_NAME = "oceanscan-raw"

_LAT_UNITS = ("degrees_north", "degree_north", "degrees_n")
_LON_UNITS = ("degrees_east", "degree_east", "degrees_e")
_AXIS_NAME_HINTS = {
    "time": ("time", "t", "ocean_time"),
    "depth": ("depth", "deptht", "lev", "level", "z"),
    "lat": ("lat", "latitude", "y", "nav_lat"),
    "lon": ("lon", "longitude", "x", "nav_lon"),
}


@dataclass(frozen=True)
class ClipSpec:
    """Geographic box, depth cap, and inclusive time-step range."""

    lon_min: float
    lon_max: float
    lat_min: float
    lat_max: float
    max_depth: float
    time_range: tuple[int, int] | None = None

    def __post_init__(self):
        if not (self.lon_min < self.lon_max and self.lat_min < self.lat_max):
            raise InvalidParameterError("clip box must have lon_min < lon_max and lat_min < lat_max")
        if self.max_depth <= 0:
            raise InvalidParameterError("max_depth must be positive")
        if self.time_range is not None and self.time_range[0] > self.time_range[1]:
            raise InvalidParameterError("time_range must be (first, last) with first <= last")


@dataclass
class LoadRecord:
    time_step: int
    variable: str
    seconds: float


class Dataset:
    """Base handle: a clipped view over some storage backend."""

    def __init__(self, grid: Grid4D, variables):
        self.grid = grid
        self.variables = tuple(variables)
        self.load_log: list[LoadRecord] = []
        self._lock = threading.Lock()

    # -- backend hook -----------------------------------------------------
    def _read(self, t: int, variable: str) -> np.ndarray:
        raise NotImplementedError

    # ----------------------------------------------------------------------
    def load(self, t: int, variable: str) -> ScalarVolume:
        """Materialize one (D, NLat, NLon) volume; the call is timed."""
        nt = len(self.grid.time)
        if not 0 <= t < nt:
            raise BoundsError(f"time step {t} outside [0, {nt})")
        if variable not in self.variables:
            raise VariableNotFoundError(variable)
        t0 = _time.perf_counter()
        values = self._read(t, variable)
        vol = ScalarVolume(self.grid.at_time(t), values, variable)
        with self._lock:
            self.load_log.append(LoadRecord(t, variable, _time.perf_counter() - t0))
        return vol

    def load_vector(self, t: int, u="u", v="v", w=None) -> VectorVolume:
        wvol = self.load(t, w) if w is not None and w in self.variables else None
        return VectorVolume(self.load(t, u), self.load(t, v), wvol)

    @property
    def n_steps(self) -> int:
        return len(self.grid.time)

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_lock"] = None
        state["load_log"] = []
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()


class ArrayDataset(Dataset):
    """In-memory dataset over (T, D, NLat, NLon) arrays."""

    def __init__(self, grid: Grid4D, arrays: dict):
        super().__init__(grid, arrays.keys())
        shape = grid.shape
        for name, arr in arrays.items():
            if arr.shape != shape:
                raise ValidationError(f"variable {name!r} shape {arr.shape} != grid {shape}")
        self._arrays = {k: np.asarray(v) for k, v in arrays.items()}

    def _read(self, t, variable):
        return self._arrays[variable][t]


class DerivedVariables(Dataset):
    """View adding derived fields (speed, vorticity, ...) as variables.

    u/v are loaded from the base dataset and the derived field computed on
    demand, so a cinema database can store derived overviews without a
    separate materialization pass.
    """

    def __init__(self, base: Dataset, kinds, u="u", v="v"):
        from .grid import DERIVED_KINDS

        for kind in kinds:
            if kind not in DERIVED_KINDS:
                raise InvalidParameterError(f"unknown derived field kind {kind!r}")
        super().__init__(base.grid, tuple(base.variables) + tuple(kinds))
        self._base = base
        self._kinds = tuple(kinds)
        self._uv = (u, v)

    def _read(self, t, variable):
        from .grid import derived_field

        if variable in self._base.variables:
            return self._base._read(t, variable)
        vel = self._base.load_vector(t, *self._uv)
        return derived_field(vel, variable).values


# -- raw internal format ---------------------------------------------------

def _blob_name(variable: str, t: int) -> str:
    return f"{variable}_t{t:04d}.f32"


def write_raw(dataset: Dataset, out_dir, variables=None, time_range=None):
    """Export a dataset (or a slice of it) to the raw internal format."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    variables = list(variables or dataset.variables)
    for v in variables:
        if v not in dataset.variables:
            raise VariableNotFoundError(v)
    t0, t1 = time_range or (0, dataset.n_steps - 1)
    if not (0 <= t0 <= t1 < dataset.n_steps):
        raise BoundsError(f"time range ({t0}, {t1}) outside [0, {dataset.n_steps})")
    steps = range(t0, t1 + 1)
    g = dataset.grid
    header = {
        "format": RAW_FORMAT_NAME,
        "version": 1,
        "axes": {
            "time": [float(x) for x in g.time.coords[t0 : t1 + 1]],
            "depth": [float(x) for x in g.depth.coords],
            "lat": [float(x) for x in g.lat.coords],
            "lon": [float(x) for x in g.lon.coords],
        },
        "metric": g.metric,
        "variables": variables,
        "fill": "nan",
        "dtype": "<f4",
        "order": ["depth", "lat", "lon"],
    }
    (out / RAW_HEADER).write_text(json.dumps(header, indent=2, sort_keys=True))
    for v in variables:
        for k, t in enumerate(steps):
            vol = dataset.load(t, v)
            (out / _blob_name(v, k)).write_bytes(
                np.ascontiguousarray(vol.values, dtype="<f4").tobytes()
            )
    return out / RAW_HEADER


class RawDataset(Dataset):
    """Reader for the raw internal format (one blob per variable per step)."""

    def __init__(self, directory):
        self.directory = Path(directory)
        header_path = self.directory / RAW_HEADER
        if not header_path.exists():
            raise FormatError(f"no {RAW_HEADER} in {self.directory}")
        try:
            header = json.loads(header_path.read_text())
        except json.JSONDecodeError as e:
            raise FormatError(f"unreadable raw header: {e}") from e
        if header.get("format") != RAW_FORMAT_NAME:
            raise FormatError(f"not a {RAW_FORMAT_NAME} directory: {self.directory}")
        axes = header["axes"]
        grid = Grid4D.from_coords(axes["time"], axes["depth"], axes["lat"], axes["lon"],
                                  metric=header.get("metric", "spherical"))
        super().__init__(grid, header["variables"])
        self.header = header

    def _read(self, t, variable):
        path = self.directory / _blob_name(variable, t)
        data = np.fromfile(path, dtype="<f4")
        return data.reshape(self.grid.volume_shape)


# -- NetCDF ------------------------------------------------------------------

def _classify_axis(name, units, axis_attr):
    units = (units or "").lower()
    name = name.lower()
    if axis_attr:
        hit = {"t": "time", "z": "depth", "y": "lat", "x": "lon"}.get(axis_attr.lower())
        if hit:
            return hit
    if any(units.startswith(u) for u in _LAT_UNITS):
        return "lat"
    if any(units.startswith(u) for u in _LON_UNITS):
        return "lon"
    if "since" in units:
        return "time"
    for axis, hints in _AXIS_NAME_HINTS.items():
        if name in hints:
            return axis
    return None


def _normalize_lon(coords):
    out = np.where(coords >= 180.0, coords - 360.0, coords)
    return out


def _to_days(coords, units):
    units = (units or "").lower()
    scale = 1.0
    if units.startswith("seconds"):
        scale = 1.0 / 86400.0
    elif units.startswith("hours"):
        scale = 1.0 / 24.0
    elif units.startswith("minutes"):
        scale = 1.0 / 1440.0
    coords = np.asarray(coords, dtype=np.float64) * scale
    return coords - coords[0]


class _NetCDFBackend:
    """Minimal CF-style access over either classic (scipy) or HDF5 (h5py)."""

    def __init__(self, path):
        self.path = Path(path)
        with open(self.path, "rb") as f:
            magic = f.read(8)
        if magic[:3] == b"CDF":
            self.kind = "classic"
        elif magic[:8] == b"\x89HDF\r\n\x1a\n":
            self.kind = "netcdf4"
        else:
            raise FormatError(f"{self.path}: not a NetCDF classic or NetCDF-4 file")
        self._handle = None
        self._lock = threading.Lock()

    def __getstate__(self):
        return {"path": self.path, "kind": self.kind}

    def __setstate__(self, state):
        self.path = state["path"]
        self.kind = state["kind"]
        self._handle = None
        self._lock = threading.Lock()

    def _open(self):
        if self._handle is None:
            if self.kind == "classic":
                from scipy.io import netcdf_file

                self._handle = netcdf_file(str(self.path), "r", mmap=True)
            else:
                import h5py

                self._handle = h5py.File(str(self.path), "r")
        return self._handle

    def variable_names(self):
        with self._lock:
            h = self._open()
            if self.kind == "classic":
                return list(h.variables.keys())
            return [k for k in h.keys() if hasattr(h[k], "shape")]

    def var_dims(self, name):
        with self._lock:
            h = self._open()
            if self.kind == "classic":
                return tuple(h.variables[name].dimensions)
            ds = h[name]
            dims = []
            for i, dim in enumerate(ds.dims):
                dims.append(dim[0].name.rsplit("/", 1)[-1] if len(dim) else f"dim{i}")
            return tuple(dims)

    def attrs(self, name):
        with self._lock:
            h = self._open()
            if self.kind == "classic":
                raw = h.variables[name]._attributes
                return {k: (v.decode() if isinstance(v, bytes) else v) for k, v in raw.items()}
            out = {}
            for k, v in h[name].attrs.items():
                if isinstance(v, bytes):
                    v = v.decode()
                out[k] = v
            return out

    def read_coord(self, name):
        with self._lock:
            h = self._open()
            if self.kind == "classic":
                return np.array(h.variables[name][:], dtype=np.float64)
            return np.array(h[name][...], dtype=np.float64)

    def var_shape(self, name):
        with self._lock:
            h = self._open()
            var = h.variables[name] if self.kind == "classic" else h[name]
            return tuple(var.shape)

    def read_slab(self, name, t, depth_sl, lat_sl, lon_sl):
        # metadata access and reads are serialized per handle
        with self._lock:
            h = self._open()
            var = h.variables[name] if self.kind == "classic" else h[name]
            data = var[t, depth_sl, lat_sl, lon_sl]
            return np.array(data)


def ingest_netcdf(path, variables, clip: ClipSpec | None = None, metric="spherical"):
    """Open a CF-style rectilinear NetCDF file as a clipped dataset.

    Longitudes are normalized to [-180, 180); a descending latitude axis is
    flipped; depth stored positive-up is negated to positive-down; fill
    values map to NaN on load.
    """
    backend = _NetCDFBackend(path)
    names = backend.variable_names()
    for v in variables:
        if v not in names:
            raise VariableNotFoundError(v)

    dims = backend.var_dims(variables[0])
    if len(dims) != 4:
        raise FormatError(f"{variables[0]}: expected 4 dimensions, found {dims}")
    for v in variables[1:]:
        if backend.var_dims(v) != dims:
            raise FormatError(
                f"{v}: dimensions {backend.var_dims(v)} differ from {variables[0]}'s {dims}"
            )
    axis_for_dim = {}
    for dim in dims:
        if dim in names:
            a = backend.attrs(dim)
            axis = _classify_axis(dim, a.get("units"), a.get("axis"))
        else:
            axis = _classify_axis(dim, None, None)
        if axis is None:
            raise FormatError(f"cannot identify dimension {dim!r} as time/depth/lat/lon")
        axis_for_dim[dim] = axis
    if tuple(axis_for_dim[d] for d in dims) != ("time", "depth", "lat", "lon"):
        raise FormatError(f"dimensions {dims} are not ordered (time, depth, lat, lon)")

    shape = backend.var_shape(variables[0])
    coords = {}
    flips = {}
    for i, dim in enumerate(dims):
        axis = axis_for_dim[dim]
        if dim in names:
            c = backend.read_coord(dim)
            attrs = backend.attrs(dim)
        else:
            c = np.arange(shape[i], dtype=np.float64)
            attrs = {}
        if axis == "lon":
            c = _normalize_lon(c)
        if axis == "depth" and str(attrs.get("positive", "down")).lower() == "up":
            c = -c
        if axis == "time":
            c = _to_days(c, attrs.get("units"))
        flip = False
        if c.size > 1 and np.all(np.diff(c) < 0):
            c = c[::-1]
            flip = True
        if c.size > 1 and not np.all(np.diff(c) > 0):
            raise FormatError(f"coordinate {dim!r} is not monotone")
        coords[axis] = c
        flips[axis] = flip

    slices = {"depth": slice(None), "lat": slice(None), "lon": slice(None)}
    t_first, t_last = 0, len(coords["time"]) - 1
    if clip is not None:
        slices["lon"] = clip_to_box(coords["lon"], clip.lon_min, clip.lon_max)
        slices["lat"] = clip_to_box(coords["lat"], clip.lat_min, clip.lat_max)
        slices["depth"] = clip_to_box(coords["depth"], coords["depth"][0], clip.max_depth)
        if clip.time_range is not None:
            t_first, t_last = clip.time_range
            if not (0 <= t_first <= t_last <= len(coords["time"]) - 1):
                raise BoundsError(f"time_range {clip.time_range} outside the file")
    grid = Grid4D.from_coords(
        coords["time"][t_first : t_last + 1],
        coords["depth"][slices["depth"]],
        coords["lat"][slices["lat"]],
        coords["lon"][slices["lon"]],
        metric=metric,
    )
    ds = NetCDFDataset(backend, grid, variables, slices, flips, t_first)
    time_dim = dims[0]
    ds.time_units = backend.attrs(time_dim).get("units") if time_dim in names else None
    return ds


class NetCDFDataset(Dataset):
    #: original time-axis units string, kept as epoch metadata; the grid's
    #: time axis itself is days from the first record
    time_units: str | None = None

    def __init__(self, backend, grid, variables, slices, flips, t_offset):
        super().__init__(grid, variables)
        self._backend = backend
        self._slices = slices
        self._flips = flips
        self._t_offset = t_offset
        self._fill = {}
        for v in variables:
            a = backend.attrs(v)
            fill = a.get("_FillValue", a.get("missing_value"))
            scale = float(a.get("scale_factor", 1.0))
            offset = float(a.get("add_offset", 0.0))
            self._fill[v] = (fill, scale, offset)

    def _read(self, t, variable):
        full = {"depth": slice(None), "lat": slice(None), "lon": slice(None)}
        sl = {k: full[k] for k in full}
        # flipped axes are read whole and reversed before clipping
        for axis in full:
            if not self._flips.get(axis):
                sl[axis] = self._slices[axis]
        data = self._backend.read_slab(variable, self._t_offset + t,
                                       sl["depth"], sl["lat"], sl["lon"])
        for ax_i, axis in enumerate(("depth", "lat", "lon")):
            if self._flips.get(axis):
                data = np.flip(data, axis=ax_i)
                idx = [slice(None)] * 3
                idx[ax_i] = self._slices[axis]
                data = data[tuple(idx)]
        fill, scale, offset = self._fill[variable]
        raw = np.asarray(data)
        if fill is None:
            mask = None
        elif np.issubdtype(raw.dtype, np.floating):
            mask = np.isclose(raw, fill, rtol=1e-6, atol=0)
        else:
            mask = raw == fill
        # packed variables unpack in float64 before narrowing to float32
        out = raw.astype(np.float64)
        if scale != 1.0 or offset != 0.0:
            out = out * scale + offset
        out = out.astype(np.float32)
        if mask is not None:
            out[mask] = np.nan
        return out


def open_dataset(path, variables=None, clip=None, metric="spherical") -> Dataset:
    """Open a raw-format directory or a NetCDF file."""
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such dataset: {p}")
    if p.is_dir():
        ds = RawDataset(p)
        if variables:
            for v in variables:
                if v not in ds.variables:
                    raise VariableNotFoundError(v)
            ds.variables = tuple(variables)
        if clip is not None:
            raise InvalidParameterError("clipping raw datasets is done at ingest time")
        return ds
    if variables is None:
        raise InvalidParameterError("NetCDF ingestion requires an explicit variable list")
    return ingest_netcdf(p, variables, clip, metric=metric)
