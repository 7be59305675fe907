"""oceanscan: parallel ocean feature extraction and tracking.

Extracts surface fronts, mesoscale eddies, fieldlines, and depth profiles
from time-varying rectilinear ocean fields, tracks fronts over time into
a track graph, and emits a compact float-image database for post hoc
browsing.
"""

__version__ = "0.1.0"

from .dataset import ArrayDataset, ClipSpec, RawDataset, ingest_netcdf, open_dataset, write_raw
from .grid import (
    CURL_MAGNITUDE,
    OKUBO_WEISS,
    SPEED,
    VORTICITY,
    Grid4D,
    GridAxis,
    ResampleSpec,
    ScalarVolume,
    VectorVolume,
    derived_field,
    resample_regular,
)

__all__ = [
    "ArrayDataset",
    "ClipSpec",
    "CURL_MAGNITUDE",
    "Grid4D",
    "GridAxis",
    "OKUBO_WEISS",
    "RawDataset",
    "ResampleSpec",
    "SPEED",
    "ScalarVolume",
    "VORTICITY",
    "VectorVolume",
    "derived_field",
    "ingest_netcdf",
    "open_dataset",
    "resample_regular",
    "write_raw",
    "__version__",
]
