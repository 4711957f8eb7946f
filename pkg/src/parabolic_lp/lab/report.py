"""Report serialization (JSON and flat CSV)."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .inequalities import SCHEMA_VERSION, InequalityReport

__all__ = ["to_jsonable", "dump_json", "dump_csv", "write_report", "flatten"]


def to_jsonable(obj):
    """Converts numpy scalars/arrays, tuples and non-finite floats to JSON values."""
    if isinstance(obj, InequalityReport):
        obj = obj.as_dict()
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def dump_json(payload) -> str:
    payload = to_jsonable(payload)
    if isinstance(payload, dict):
        payload.setdefault("schema_version", SCHEMA_VERSION)
    return json.dumps(payload, indent=2, sort_keys=False)


def flatten(d: dict, prefix: str = "") -> dict:
    """Nested dict -> ``{"a.b": value}`` (lists of scalars are joined with ``;``)."""
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = ";".join(str(x) for x in v)
        else:
            out[key] = v
    return out


def dump_csv(rows: list[dict]) -> str:
    """One CSV row per record (``per_sample`` for a report)."""
    flat = [flatten(to_jsonable(r)) for r in rows]
    cols = []
    for r in flat:
        cols.extend(c for c in r if c not in cols)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    w.writerows(flat)
    return buf.getvalue()


def write_report(payload, path=None, fmt: str = "json") -> str:
    """Serializes ``payload`` as JSON or CSV; writes to ``path`` when given."""
    if fmt == "json":
        text = dump_json(payload)
    elif fmt == "csv":
        if isinstance(payload, InequalityReport):
            rows = payload.per_sample
        elif isinstance(payload, dict) and "per_sample" in payload:
            rows = payload["per_sample"]
        elif isinstance(payload, dict) and "results" in payload:
            rows = payload["results"]
        elif isinstance(payload, list):
            rows = payload
        else:
            rows = [payload]
        text = dump_csv(rows)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text
