"""Series and table persistence.

Two series formats: CSV with a header (human scale) and raw little-endian
float64 (large runs). Both carry a JSON sidecar <path>.json with delta and
provenance so files round-trip without external context. Floats in CSV are
written with 17 significant digits, enough to reproduce doubles exactly.
"""

import json
import os

import numpy as np

from cmakit.errors import DomainError
from cmakit.estimators import SampledSeries

FLOAT_FMT = "%.17g"


def _sidecar_path(path):
    return str(path) + ".json"


def write_sidecar(path, meta):
    with open(_sidecar_path(path), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_sidecar(path):
    with open(_sidecar_path(path)) as fh:
        return json.load(fh)


def write_series(path, series, fmt="csv", extra_meta=None):
    """Write a SampledSeries plus its JSON sidecar; fmt is csv or raw."""
    meta = {
        "delta": series.delta,
        "n": int(series.n),
        "format": fmt,
        "mean_removed": bool(series.mean_removed),
    }
    if extra_meta:
        meta.update(extra_meta)
    if fmt == "csv":
        with open(path, "w") as fh:
            fh.write("value\n")
            for v in series.values:
                fh.write(FLOAT_FMT % v + "\n")
    elif fmt == "raw":
        series.values.astype("<f8").tofile(path)
    else:
        raise DomainError(f"unknown series format {fmt!r}")
    write_sidecar(path, meta)


def read_series(path):
    """Read a series written by write_series, using the sidecar for delta."""
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    meta = read_sidecar(path)
    fmt = meta.get("format", "csv")
    if fmt == "csv":
        values = np.loadtxt(path, skiprows=1, dtype=np.float64, ndmin=1)
    elif fmt == "raw":
        values = np.fromfile(path, dtype="<f8")
    else:
        raise DomainError(f"unknown series format {fmt!r} in sidecar")
    n = meta.get("n")
    if n is not None and int(n) != values.size:
        raise DomainError(f"sidecar records n = {n} but file holds {values.size} values")
    return SampledSeries(
        delta=float(meta["delta"]),
        values=values,
        mean_removed=bool(meta.get("mean_removed", False)),
    )


def write_table(path, columns, header):
    """CSV table from equal-length columns, 17-significant-digit floats."""
    cols = [np.asarray(c) for c in columns]
    if len(set(c.size for c in cols)) > 1:
        raise DomainError("table columns must have equal length")
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(FLOAT_FMT % v for v in row) + "\n")
