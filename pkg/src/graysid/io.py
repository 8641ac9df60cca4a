"""File formats: model/region/problem JSON and signal/table CSV."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .lti import DiscreteStateSpace, SignalRecord
from .regions import LmiRegion

__all__ = [
    "to_jsonable",
    "write_json",
    "read_json",
    "write_csv",
    "read_csv",
    "write_model",
    "read_model",
    "write_region",
    "read_region",
    "write_signal",
    "read_signal",
]


def to_jsonable(obj):
    """Recursively convert numpy values to plain Python; non-finite floats become ``None``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def read_csv(path):
    """Return ``(header, rows)`` with every cell left as a string."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r if row]


def write_model(path, model: DiscreteStateSpace) -> Path:
    return write_json(path, model.to_dict())


def read_model(path, ts: float | None = None) -> DiscreteStateSpace:
    obj = read_json(path)
    if obj.get("ts") is None and ts is not None:
        obj["ts"] = ts
    return DiscreteStateSpace.from_dict(obj)


def write_region(path, region: LmiRegion) -> Path:
    return write_json(path, region.to_dict())


def read_region(path) -> LmiRegion:
    return LmiRegion.from_dict(read_json(path))


def write_signal(path, rec: SignalRecord) -> Path:
    header = rec.header()
    cols = [rec.t] + [rec.channels[h] for h in header[1:]]
    return write_csv(path, header, zip(*cols))


def read_signal(path) -> SignalRecord:
    header, rows = read_csv(path)
    if not header or header[0] != "t":
        raise ValueError(f"{path}: signal CSV must start with a 't' column")
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    t = data[:, 0]
    ts = float(t[1] - t[0]) if t.size > 1 else 1.0
    return SignalRecord(ts, t, {h: data[:, i] for i, h in enumerate(header) if i > 0})
