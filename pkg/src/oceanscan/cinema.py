"""Float-image database: one lossless PNG per (time, depth, field).

Each pixel of an image is the little-endian IEEE-754 float32 of the
scalar value packed into the four RGBA bytes, so the database round-trips
bit-exactly (NaN land included) and derived fields can be recomputed from
the images alone. The index is a Cinema-style CSV with a FILE column plus
a JSON metadata sidecar.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InvalidInputError, InvalidParameterError
from .parallel import WorkerPool

ENCODER_NAME = "f32le-rgba"
INDEX_NAME = "data.csv"
METADATA_NAME = "metadata.json"


def encode_float_image(slice2d: np.ndarray) -> bytes:
    """2D float32 array to RGBA8 PNG bytes (pixel bytes = LE float32)."""
    arr = np.ascontiguousarray(slice2d, dtype="<f4")
    if arr.ndim != 2:
        raise InvalidInputError("float images are 2D")
    h, w = arr.shape
    img = Image.frombuffer("RGBA", (w, h), arr.tobytes(), "raw", "RGBA", 0, 1)
    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def decode_float_image(png_bytes: bytes) -> np.ndarray:
    """Inverse of encode_float_image, bit-exact including NaN payloads."""
    img = Image.open(io.BytesIO(png_bytes))
    if img.mode != "RGBA":
        raise InvalidInputError(f"expected an RGBA float image, got mode {img.mode}")
    w, h = img.size
    return np.frombuffer(img.tobytes(), dtype="<f4").reshape(h, w).copy()


@dataclass
class CinemaIndex:
    rows: list  # (time_step, depth_or_slice_value, field, relative path)
    metadata: dict
    directory: Path | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        key = self.metadata.get("sliceAxis", "depth")
        writer.writerow(["time", key, "field", "FILE"])
        for row in self.rows:
            writer.writerow([row[0], repr(float(row[1])), row[2], row[3]])
        return buf.getvalue()

    @staticmethod
    def read(directory) -> "CinemaIndex":
        directory = Path(directory)
        metadata = json.loads((directory / METADATA_NAME).read_text())
        rows = []
        with open(directory / INDEX_NAME, newline="") as f:
            reader = csv.reader(f)
            header = next(reader)
            if header[-1] != "FILE":
                raise InvalidInputError(f"unexpected index header {header}")
            for rec in reader:
                rows.append((int(rec[0]), float(rec[1]), rec[2], rec[3]))
        return CinemaIndex(rows, metadata, directory)


def _image_name(t: int, slice_idx: int, field: str, axis: str) -> str:
    return f"time{t}_{axis}{slice_idx}_{field}.png"


def _write_images(shared, t):
    dataset, fields, out_dir, axis = shared
    rows = []
    grid = dataset.grid
    for field in fields:
        vol = dataset.load(t, field).values.astype("<f4")
        if axis == "depth":
            for d in range(vol.shape[0]):
                name = _image_name(t, d, field, "depth")
                (out_dir / name).write_bytes(encode_float_image(vol[d]))
                rows.append((t, float(grid.depth.coords[d]), field, name))
        else:  # vertical slices at constant longitude: (depth x lat) planes
            for x in range(vol.shape[2]):
                name = _image_name(t, x, field, "lon")
                (out_dir / name).write_bytes(encode_float_image(vol[:, :, x]))
                rows.append((t, float(grid.lon.coords[x]), field, name))
    return rows


def generate_database(dataset, fields, time_range=None, out_dir="cinema",
                      workers: int = 1, orientation: str = "depth") -> CinemaIndex:
    """Write one float image per (time, slice, field) plus the index.

    orientation "depth" (default) stores lat-lon depth slices; "vertical"
    stores depth-lat planes per longitude instead. Image generation is
    parallel over time steps with deterministic file naming; the index is
    written once by the coordinator, so regeneration over the same inputs
    is byte-identical.
    """
    if orientation not in ("depth", "vertical"):
        raise InvalidParameterError(f"unknown orientation {orientation!r}")
    for f in fields:
        if f not in dataset.variables:
            from .errors import VariableNotFoundError

            raise VariableNotFoundError(f)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if time_range is None:
        steps = list(range(dataset.n_steps))
    else:
        steps = list(range(time_range[0], time_range[1] + 1))

    axis = "depth" if orientation == "depth" else "lon"
    pool = WorkerPool(workers)
    per_step = pool.map(_write_images, (dataset, list(fields), out, axis), steps)
    rows = [row for chunk in per_step for row in chunk]
    rows.sort(key=lambda r: (r[0], r[1], r[2]))

    g = dataset.grid
    metadata = {
        "encoder": ENCODER_NAME,
        "version": 1,
        "sliceAxis": axis,
        "fields": list(fields),
        "axes": {
            "time": [float(x) for x in g.time.coords],
            "depth": [float(x) for x in g.depth.coords],
            "lat": [float(x) for x in g.lat.coords],
            "lon": [float(x) for x in g.lon.coords],
        },
        "timeSteps": steps,
        "imageShape": (
            [len(g.lat), len(g.lon)] if axis == "depth" else [len(g.depth), len(g.lat)]
        ),
    }
    index = CinemaIndex(rows, metadata, out)
    (out / INDEX_NAME).write_text(index.to_csv())
    (out / METADATA_NAME).write_text(json.dumps(metadata, indent=2, sort_keys=True))
    return index


def compression_report(source_paths, index: CinemaIndex) -> dict:
    """Measured on-disk ratio of database bytes to source bytes."""
    def tree_bytes(path):
        p = Path(path)
        if p.is_file():
            return p.stat().st_size
        return sum(f.stat().st_size for f in p.rglob("*") if f.is_file())

    if isinstance(source_paths, (str, Path)):
        source_paths = [source_paths]
    source_bytes = sum(tree_bytes(p) for p in source_paths)
    db_bytes = tree_bytes(index.directory)
    return {
        "sourceBytes": int(source_bytes),
        "databaseBytes": int(db_bytes),
        "ratio": (db_bytes / source_bytes) if source_bytes else float("nan"),
    }
