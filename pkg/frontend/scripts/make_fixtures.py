#!/usr/bin/env python3
"""Regenerate the viewer test fixtures from the primary package.

Builds a small 4-step dataset with a translating high-salinity square and
a rotating current, exports a cinema database (including the derived speed
field), track/eddy overlays, and a depth profile, and dumps the exact
float32 payload of every image as .bin for bit-exact assertions.

Usage: python scripts/make_fixtures.py [outdir]
"""
import json
import sys
from pathlib import Path

import numpy as np

from oceanscan.dataset import ArrayDataset, DerivedVariables
from oceanscan.depth_profile import profile_json, sample_needle
from oceanscan.cinema import decode_float_image, generate_database
from oceanscan.eddies import detect_eddies, eddies_geojson
from oceanscan.flow import IntegrationParams
from oceanscan.fronts import IsovolumeSpec, build_track_graph, longest_tracks, tracks_geojson
from oceanscan.grid import Grid4D


def build_dataset():
    nsteps, nd, nlat, nlon = 4, 2, 12, 16
    lon = np.linspace(80.0, 87.5, nlon)
    lat = np.linspace(6.0, 11.5, nlat)
    depth = np.array([10.0, 50.0])
    grid = Grid4D.from_coords(np.arange(float(nsteps)), depth, lat, lon)

    ocean = np.ones((nlat, nlon), dtype=bool)
    ocean[-2:, :3] = False  # a patch of land in the northwest

    sal = np.full((nsteps, nd, nlat, nlon), 34.2, dtype=np.float32)
    for t in range(nsteps):
        y, x = 2 + t, 3 + 2 * t
        sal[t, :, y : y + 3, x : x + 3] = 36.1
    sal[:, :, ~ocean] = np.nan

    # rotation centered on a grid node so the speed minimum is strict
    yy, xx = np.meshgrid((lat - 9.0) / 3.0, (lon - 84.0) / 4.0, indexing="ij")
    u2d = (-yy * 0.4).astype(np.float32)
    v2d = (xx * 0.4).astype(np.float32)
    u = np.broadcast_to(u2d, (nsteps, nd, nlat, nlon)).copy()
    v = np.broadcast_to(v2d, (nsteps, nd, nlat, nlon)).copy()
    u[:, :, ~ocean] = np.nan
    v[:, :, ~ocean] = np.nan
    return ArrayDataset(grid, {"salinity": sal, "u": u, "v": v})


def main(out_dir):
    out = Path(out_dir)
    db = out / "viewer_data"
    ds = build_dataset()
    with_speed = DerivedVariables(ds, ["speed"])
    generate_database(with_speed, ["salinity", "u", "v", "speed"], out_dir=db)

    graph = build_track_graph(ds, IsovolumeSpec(), n=3)
    tracks = longest_tracks(graph, 1)
    (db / "tracks.geojson").write_text(tracks_geojson(graph, tracks))

    vel = ds.load_vector(0)
    descs = detect_eddies(
        vel, params=IntegrationParams(step_size=0.05, max_steps=1200), r_max=4.0
    )
    (db / "eddies.geojson").write_text(eddies_geojson(descs))

    profile = sample_needle(ds, lon=84.0, lat=9.0)
    (db / "profiles.json").write_text(profile_json(profile))

    expected = out / "expected"
    expected.mkdir(parents=True, exist_ok=True)
    for png in sorted(db.glob("*.png")):
        values = decode_float_image(png.read_bytes())
        (expected / (png.stem + ".bin")).write_bytes(
            np.ascontiguousarray(values, dtype="<f4").tobytes()
        )
    summary = {
        "vertices": len(graph.vertices),
        "arcs": len(graph.arcs),
        "trackLength": len(tracks[0]) if tracks else 0,
        "eddies": len(descs),
        "images": len(list(db.glob("*.png"))),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    print(json.dumps(summary))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent.parent / "test" / "fixtures")
