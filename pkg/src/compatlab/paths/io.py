"""Ensemble persistence: a JSON header next to an ``.npy`` array or a long-format CSV."""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .ensemble import PathEnsemble
from .grid import TimeGrid

SCHEMA = "compatlab.ensemble/1"


def spec_hash(spec) -> str:
    blob = json.dumps(spec, sort_keys=True, separators=(",", ":"), default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_ensemble(ens: PathEnsemble, stem, fmt: str = "npy", summary: dict | None = None) -> Path:
    """Write ``stem.json`` plus ``stem.npy`` or ``stem.csv``; returns the header path."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "npy":
        data = stem.with_suffix(".npy")
        np.save(data, np.ascontiguousarray(ens.values))
    elif fmt == "csv":
        data = stem.with_suffix(".csv")
        P, K, d = ens.values.shape
        with open(data, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["path", "step", "dim", "value"])
            for i, pid in enumerate(ens.path_ids):
                for k in range(K):
                    for j in range(d):
                        w.writerow([int(pid), k, j, repr(float(ens.values[i, k, j]))])
    else:
        raise ValueError(f"unknown ensemble format {fmt!r}")
    ids = ens.path_ids
    contiguous = bool(len(ids) and np.array_equal(ids, np.arange(ids[0], ids[0] + len(ids))))
    header = {
        "schema": SCHEMA,
        "format": fmt,
        "data": data.name,
        "grid": ens.grid.as_dict(),
        "shape": list(ens.values.shape),
        "path_ids": {"start": int(ids[0]), "count": len(ids)} if contiguous else ids.tolist(),
        "provenance": ens.provenance,
    }
    if summary:
        header["summary"] = summary
    hdr = stem.with_suffix(".json")
    hdr.write_text(json.dumps(header, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return hdr


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o)}")


def read_ensemble(header) -> PathEnsemble:
    header = Path(header)
    if header.suffix != ".json":
        header = header.with_suffix(".json")
    meta = json.loads(header.read_text())
    if meta.get("schema") != SCHEMA:
        raise ValueError(f"{header}: not an ensemble header")
    grid = TimeGrid(float(meta["grid"]["horizon"]), int(meta["grid"]["steps"]))
    ids = meta["path_ids"]
    ids = np.arange(ids["start"], ids["start"] + ids["count"]) if isinstance(ids, dict) else np.asarray(ids)
    P, K, d = meta["shape"]
    data = header.parent / meta["data"]
    if meta["format"] == "npy":
        values = np.load(data)
    else:
        values = np.empty((P, K, d))
        pos = {int(p): i for i, p in enumerate(ids)}
        with open(data, newline="") as fh:
            rows = csv.reader(fh)
            next(rows)
            for p, k, j, v in rows:
                values[pos[int(p)], int(k), int(j)] = float(v)
    if values.shape != (P, K, d):
        raise ValueError(f"{data}: shape {values.shape} does not match header {meta['shape']}")
    return PathEnsemble(values, grid, ids, meta.get("provenance", {}))
