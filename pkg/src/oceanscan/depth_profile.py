"""Vertical-column sampling: drop a needle at (lon, lat) and read every
field at every depth level and time step."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomainError
from .grid import interp_weights


@dataclass
class DepthProfile:
    position: tuple[float, float]  # (lon, lat)
    depths: np.ndarray
    # samples[field][time_step] -> array of values aligned with depths
    samples: dict
    time_steps: list
    is_land: bool = False


def sample_needle(dataset, lon: float, lat: float, fields=None,
                  time_range: tuple[int, int] | None = None) -> DepthProfile:
    """Bilinear lat-lon interpolation of every requested field along depth.

    A sample is NaN when any of its four horizontal corners is NaN, so no
    value is fabricated next to coastlines. A column that is NaN at every
    depth for every field is flagged as land.
    """
    grid = dataset.grid
    try:
        ilo, ihi, wi = (x.item() for x in interp_weights(grid.lat.coords, [lat]))
        jlo, jhi, wj = (x.item() for x in interp_weights(grid.lon.coords, [lon]))
    except OutOfDomainError as e:
        raise OutOfDomainError(f"needle position ({lon}, {lat}) outside the domain") from e
    fields = list(fields or dataset.variables)
    t0, t1 = time_range or (0, dataset.n_steps - 1)
    steps = list(range(t0, t1 + 1))

    samples = {f: [] for f in fields}
    any_finite = False
    for f in fields:
        for t in steps:
            vol = dataset.load(t, f).values
            corners = np.stack(
                [vol[:, ilo, jlo], vol[:, ilo, jhi], vol[:, ihi, jlo], vol[:, ihi, jhi]]
            )
            col = (
                (1 - wi) * ((1 - wj) * corners[0] + wj * corners[1])
                + wi * ((1 - wj) * corners[2] + wj * corners[3])
            )
            col = np.where(np.isnan(corners).any(axis=0), np.nan, col)
            samples[f].append(col)
            any_finite = any_finite or bool(np.isfinite(col).any())
    return DepthProfile(
        position=(float(lon), float(lat)),
        depths=grid.depth.coords.copy(),
        samples=samples,
        time_steps=steps,
        is_land=not any_finite,
    )


def select_depth_interval(profile: DepthProfile, intervals) -> DepthProfile:
    """Restrict a profile to the union of [lo, hi] depth intervals.

    An empty intersection yields an empty profile, not an error.
    """
    keep = np.zeros(profile.depths.size, dtype=bool)
    for lo, hi in intervals:
        keep |= (profile.depths >= lo) & (profile.depths <= hi)
    return DepthProfile(
        position=profile.position,
        depths=profile.depths[keep],
        samples={f: [col[keep] for col in cols] for f, cols in profile.samples.items()},
        time_steps=list(profile.time_steps),
        is_land=profile.is_land,
    )


def profile_csv(profile: DepthProfile) -> str:
    """Columns: time, depth, field, value (empty value for NaN)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["time", "depth", "field", "value"])
    for f in profile.samples:
        for k, t in enumerate(profile.time_steps):
            col = profile.samples[f][k]
            for depth, value in zip(profile.depths, col):
                writer.writerow(
                    [t, repr(float(depth)), f, "" if math.isnan(value) else repr(float(value))]
                )
    return buf.getvalue()


def profile_json(profile: DepthProfile) -> str:
    """Viewer-facing JSON; NaN becomes null for strict parsers."""
    def clean(col):
        return [None if math.isnan(v) else float(v) for v in col]

    return json.dumps(
        {
            "position": {"lon": profile.position[0], "lat": profile.position[1]},
            "depths": [float(d) for d in profile.depths],
            "timeSteps": list(profile.time_steps),
            "isLand": profile.is_land,
            "samples": {
                f: [clean(col) for col in cols] for f, cols in profile.samples.items()
            },
        },
        indent=2,
        sort_keys=True,
    )
