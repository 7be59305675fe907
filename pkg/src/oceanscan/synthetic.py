"""Synthetic ocean fields for tests, fixtures, and the scaling benchmarks.

Real model output is large and not redistributable, so benchmarks and
golden tests run on generated analogues: a translating high-salinity blob
(front tracking), analytic vortices (eddy detection, fieldlines), and an
optional coastline band of NaN land.
"""
from __future__ import annotations

import numpy as np

from .grid import Grid4D, ScalarVolume, VectorVolume


def bob_like_axes(nlat=32, nlon=32, ndepth=8, nsteps=4, max_depth=200.0):
    """Axes loosely shaped like a clipped bay: lon 75..96 E, lat -5..30 N."""
    lon = np.linspace(75.0, 96.0, nlon)
    lat = np.linspace(-5.0, 30.0, nlat)
    depth = np.linspace(max_depth / ndepth, max_depth, ndepth)
    time = np.arange(nsteps, dtype=float)
    return time, depth, lat, lon


def cartesian_grid(n=64, half_width=2.0, ndepth=1, nsteps=1):
    """Square cartesian test grid centered on the origin (units: meters)."""
    xy = np.linspace(-half_width, half_width, n)
    depth = np.arange(1.0, ndepth + 1.0)
    time = np.arange(nsteps, dtype=float)
    return Grid4D.from_coords(time, depth, xy, xy, metric="cartesian")


def coastline_mask(nlat, nlon, land_rows=0, land_cols=0):
    """Ocean mask with a land band along the north edge and west edge."""
    mask = np.ones((nlat, nlon), dtype=bool)
    if land_rows:
        mask[-land_rows:, :] = False
    if land_cols:
        mask[:, :land_cols] = False
    return mask


def translating_blob_salinity(grid: Grid4D, t_index, base=34.0, amplitude=2.5,
                              radius=0.18, speed=0.08, start=(0.3, 0.25),
                              ocean_mask=None):
    """Salinity with a Gaussian blob of high-salinity water drifting NE.

    Positions are in fractional grid units so the field scales with
    resolution; the blob crosses the 35 threshold over roughly half its
    radius. Returns a (D, NLat, NLon) float array.
    """
    nd, nlat, nlon = grid.volume_shape
    fy = start[0] + speed * t_index
    fx = start[1] + speed * t_index
    ys = (np.arange(nlat) + 0.5) / nlat
    xs = (np.arange(nlon) + 0.5) / nlon
    yy, xx = np.meshgrid(ys, xs, indexing="ij")
    r2 = (yy - fy) ** 2 + (xx - fx) ** 2
    blob = amplitude * np.exp(-r2 / (2.0 * radius**2))
    # blob weakens with depth so fronts live in the upper levels
    fade = np.exp(-np.arange(nd) / max(nd / 2.0, 1.0))
    vol = base + fade[:, None, None] * blob[None, :, :]
    if ocean_mask is not None:
        vol = np.where(ocean_mask[None, :, :], vol, np.nan)
    return vol


def lamb_oseen_velocity(grid: Grid4D, center=(0.0, 0.0), circulation=2 * np.pi,
                        core_radius=0.7, sign=1.0):
    """Lamb-Oseen vortex: v_theta = G/(2 pi r) (1 - exp(-r^2/rc^2)).

    Speed vanishes at the center and peaks near 1.12 rc, which makes the
    center a clean flow-speed minimum. Works on cartesian grids where lat
    and lon coordinates are plain y/x.
    """
    nd = len(grid.depth)
    y = grid.lat.coords - center[1]
    x = grid.lon.coords - center[0]
    yy, xx = np.meshgrid(y, x, indexing="ij")
    r2 = xx**2 + yy**2
    r2 = np.where(r2 == 0, 1e-30, r2)
    vt_over_r = circulation / (2 * np.pi * r2) * (1.0 - np.exp(-r2 / core_radius**2))
    u2d = -sign * vt_over_r * yy
    v2d = sign * vt_over_r * xx
    u = np.broadcast_to(u2d, (nd,) + u2d.shape).copy()
    v = np.broadcast_to(v2d, (nd,) + v2d.shape).copy()
    return u, v


def solid_body_patch_velocity(grid: Grid4D, center=(0.0, 0.0), omega=1.0,
                              radius=1.0, sign=1.0):
    """Rotating core of radius R in a quiescent exterior.

    Inside R the flow is solid-body (v_theta = omega * r); outside it is
    zero, so the largest closed-loop streamline sits at R and gives an
    analytic pass/fail boundary for eddy radius searches.
    """
    nd = len(grid.depth)
    y = grid.lat.coords - center[1]
    x = grid.lon.coords - center[0]
    yy, xx = np.meshgrid(y, x, indexing="ij")
    inside = (xx**2 + yy**2) <= radius**2
    u2d = np.where(inside, -sign * omega * yy, 0.0)
    v2d = np.where(inside, sign * omega * xx, 0.0)
    u = np.broadcast_to(u2d, (nd,) + u2d.shape).copy()
    v = np.broadcast_to(v2d, (nd,) + v2d.shape).copy()
    return u, v


def solid_body_velocity(grid: Grid4D, omega=1.0):
    """u = -omega*y, v = omega*x over the whole grid (cartesian)."""
    nd = len(grid.depth)
    yy, xx = np.meshgrid(grid.lat.coords, grid.lon.coords, indexing="ij")
    u = np.broadcast_to(-omega * yy, (nd,) + yy.shape).copy()
    v = np.broadcast_to(omega * xx, (nd,) + xx.shape).copy()
    return u, v


def vector_volume(grid: Grid4D, u, v, w=None, t: int = 0) -> VectorVolume:
    g = grid.at_time(t)
    wvol = ScalarVolume(g, w, "w") if w is not None else None
    return VectorVolume(ScalarVolume(g, u, "u"), ScalarVolume(g, v, "v"), wvol)


def standard_fixture(nlat=32, nlon=32, ndepth=32, nsteps=6, land=True, seed=7):
    """The 32x32x32 x 6-step fixture exercised by the full pipeline tests.

    Salinity carries a translating blob; velocity is a mid-bay vortex plus
    a weak noisy background; a coastline band of NaN land sits along the
    north and west edges.
    """
    from .dataset import ArrayDataset

    time, depth, lat, lon = bob_like_axes(nlat, nlon, ndepth, nsteps)
    grid = Grid4D.from_coords(time, depth, lat, lon)
    mask = coastline_mask(nlat, nlon, land_rows=nlat // 8, land_cols=nlon // 8) if land else None
    rng = np.random.default_rng(seed)

    sal = np.empty((nsteps, ndepth, nlat, nlon), dtype=np.float32)
    for t in range(nsteps):
        sal[t] = translating_blob_salinity(grid, t, ocean_mask=mask)

    yy, xx = np.meshgrid((lat - lat.mean()) / (np.ptp(lat) / 2),
                         (lon - lon.mean()) / (np.ptp(lon) / 2), indexing="ij")
    r2 = np.where(xx**2 + yy**2 == 0, 1e-30, xx**2 + yy**2)
    swirl = (1.0 - np.exp(-r2 / 0.3)) / r2
    u2d = -swirl * yy + 0.02 * rng.standard_normal((nlat, nlon))
    v2d = swirl * xx + 0.02 * rng.standard_normal((nlat, nlon))
    u = np.empty_like(sal)
    v = np.empty_like(sal)
    for t in range(nsteps):
        fade = np.exp(-np.arange(ndepth) / max(ndepth / 2.0, 1.0))
        u[t] = fade[:, None, None] * u2d[None, :, :]
        v[t] = fade[:, None, None] * v2d[None, :, :]
    if mask is not None:
        for arr in (u, v):
            arr[:, :, ~mask] = np.nan

    return ArrayDataset(grid, {"salinity": sal, "u": u, "v": v})


def benchmark_dataset(scale=1, nsteps=8, ndepth=6, base_n=32, land=True, seed=3):
    """Synthetic dataset whose horizontal voxel count grows with ``scale``.

    scale multiplies the total data volume: 4 doubles lat and lon (the
    resolution-scaling sweep uses scales 1, 4, 16).
    """
    r = int(round(np.sqrt(scale)))
    if r * r != scale:
        raise ValueError("scale must be a perfect square (1, 4, 16, ...)")
    return standard_fixture(nlat=base_n * r, nlon=base_n * r, ndepth=ndepth,
                            nsteps=nsteps, land=land, seed=seed)


def write_classic_netcdf(path, time, depth, lat, lon, variables,
                         fill_value=9.96921e36, lat_descending=False):
    """Write a small CF-style classic NetCDF fixture (tests and benchmarks).

    ``variables`` maps name -> (T, D, NLat, NLon) float array; NaN cells are
    stored as the declared fill value. This is fixture plumbing, not a
    product I/O surface.
    """
    from scipy.io import netcdf_file

    lat_out = lat[::-1] if lat_descending else lat
    with netcdf_file(str(path), "w") as nc:
        nc.createDimension("time", len(time))
        nc.createDimension("depth", len(depth))
        nc.createDimension("latitude", len(lat))
        nc.createDimension("longitude", len(lon))

        vt = nc.createVariable("time", "f8", ("time",))
        vt[:] = time
        vt.units = b"days since 2020-01-01"
        vd = nc.createVariable("depth", "f4", ("depth",))
        vd[:] = depth
        vd.units = b"m"
        vd.positive = b"down"
        vla = nc.createVariable("latitude", "f4", ("latitude",))
        vla[:] = lat_out
        vla.units = b"degrees_north"
        vlo = nc.createVariable("longitude", "f4", ("longitude",))
        vlo[:] = lon
        vlo.units = b"degrees_east"

        for name, data in variables.items():
            var = nc.createVariable(name, "f4", ("time", "depth", "latitude", "longitude"))
            out = np.where(np.isnan(data), fill_value, data).astype(np.float32)
            if lat_descending:
                out = out[:, :, ::-1, :]
            var[:] = out
            var._FillValue = np.float32(fill_value)
            var.units = b"1"


def write_netcdf4(path, time, depth, lat, lon, variables, fill_value=9.96921e36):
    """Write an HDF5-backed NetCDF-4 style fixture with dimension scales."""
    import h5py

    with h5py.File(str(path), "w") as f:
        dims = {"time": time, "depth": depth, "latitude": lat, "longitude": lon}
        units = {"time": "days since 2020-01-01", "depth": "m",
                 "latitude": "degrees_north", "longitude": "degrees_east"}
        for name, coords in dims.items():
            ds = f.create_dataset(name, data=np.asarray(coords, dtype=np.float64))
            ds.make_scale(name)
            ds.attrs["units"] = units[name]
        if "depth" in f:
            f["depth"].attrs["positive"] = "down"
        for name, data in variables.items():
            out = np.where(np.isnan(data), fill_value, data).astype(np.float32)
            ds = f.create_dataset(name, data=out)
            ds.attrs["_FillValue"] = np.float32(fill_value)
            for i, dim in enumerate(("time", "depth", "latitude", "longitude")):
                ds.dims[i].attach_scale(f[dim])
