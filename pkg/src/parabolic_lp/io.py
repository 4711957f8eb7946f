"""Field import/export.

A field is stored as a JSON header (grid description plus the name of the
sample file) next to either a raw little-endian float64 file in C order
(``.bin``, bit-exact) or a one-column CSV of samples in C order (``.csv``).
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .exceptions import DataError
from .field import Field, Grid

FORMAT_VERSION = 1


def _paths(path) -> tuple[Path, str]:
    p = Path(path)
    if p.suffix in {".json", ".bin", ".csv"}:
        p = p.with_suffix("")
    return p, p.name


def save_field(field: Field, path, fmt: str = "bin", extra: dict | None = None) -> Path:
    """Writes ``<path>.json`` and ``<path>.bin`` (or ``.csv``); returns the header path."""
    base, name = _paths(path)
    base.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "bin":
        data_name = name + ".bin"
        field.values.astype("<f8").tofile(base.parent / data_name)
    elif fmt == "csv":
        data_name = name + ".csv"
        np.savetxt(base.parent / data_name, field.values.ravel(), fmt="%.17g")
    else:
        raise ValueError(f"unknown field format {fmt!r}")
    header = {"format_version": FORMAT_VERSION, "data": data_name, "encoding": fmt,
              **field.grid.header()}
    if extra:
        header["extra"] = extra
    hp = base.with_suffix(".json")
    hp.write_text(json.dumps(header, indent=2))
    return hp


def load_field(path) -> Field:
    base, _ = _paths(path)
    hp = base.with_suffix(".json")
    try:
        header = json.loads(hp.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read field header {hp}: {exc}") from None
    grid = Grid.from_header(header)
    data = hp.parent / header.get("data", base.name + ".bin")
    enc = header.get("encoding", data.suffix.lstrip("."))
    try:
        if enc == "bin":
            vals = np.fromfile(data, dtype="<f8")
        elif enc == "csv":
            vals = np.loadtxt(data, dtype=float, ndmin=1)
        else:
            raise DataError(f"unknown encoding {enc!r}")
    except OSError as exc:
        raise DataError(f"cannot read field samples {data}: {exc}") from None
    if vals.size != grid.size:
        raise DataError(f"{data} holds {vals.size} samples, header expects {grid.size}")
    return Field(grid, vals.reshape(grid.dims))
