"""Deterministic file output for the CLI.

CSV files carry '# key = value' metadata lines (sorted by key), then a
header row, then data rows with every float printed as %.16e so that a
round trip through the file is loss-free and two runs with the same
inputs produce byte-identical payloads.  The only intentionally varying
line is '# timestamp = ...', emitted last among the comments; consumers
comparing runs should drop it.  Writes go through a temp file in the
target directory followed by os.replace, so readers never observe a
half-written file.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Mapping, Optional

import numpy as np

FLOAT_FORMAT = "%.16e"


@dataclass(frozen=True)
class OutputEnvelope:
    """Where a result landed and how it was encoded."""

    format: str
    destination: str
    config_hash: str


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON-serializable: {type(x).__name__}")


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False, default=_jsonable)


def config_hash(resolved: Mapping) -> str:
    return hashlib.sha256(canonical_json(resolved).encode("utf-8")).hexdigest()


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return FLOAT_FORMAT % float(v)
    return str(v)


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ionwells-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def write_csv(
    path: str,
    columns: Mapping[str, np.ndarray],
    metadata: Optional[Mapping] = None,
    *,
    timestamp: bool = True,
) -> OutputEnvelope:
    """Write columns in insertion order with sorted metadata comments."""
    if not columns:
        raise ValueError("no columns to write")
    lengths = {k: len(np.asarray(v)) for k, v in columns.items()}
    if len(set(lengths.values())) > 1:
        raise ValueError(f"ragged columns: {lengths}")
    meta = dict(metadata or {})
    lines = [f"# {k} = {_format_value(meta[k])}" for k in sorted(meta)]
    if timestamp:
        lines.append(f"# timestamp = {_timestamp()}")
    lines.append(",".join(columns.keys()))
    arrays = [np.asarray(v) for v in columns.values()]
    n = len(arrays[0])
    for i in range(n):
        lines.append(",".join(FLOAT_FORMAT % float(a[i]) for a in arrays))
    _atomic_write(path, "\n".join(lines) + "\n")
    return OutputEnvelope(format="csv", destination=path, config_hash=config_hash(meta))


def write_json(
    path: str,
    payload: Mapping,
    *,
    timestamp: bool = True,
) -> OutputEnvelope:
    """Write a JSON document with sorted keys; timestamp goes in a fixed key."""
    doc = dict(payload)
    if timestamp:
        doc["timestamp"] = _timestamp()
    text = json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False,
                      default=_jsonable)
    _atomic_write(path, text + "\n")
    return OutputEnvelope(format="json", destination=path,
                          config_hash=config_hash(payload))


def read_csv(path: str) -> tuple[dict[str, np.ndarray], dict[str, str]]:
    """Round-trip reader for files produced by write_csv."""
    meta: dict[str, str] = {}
    header: Optional[list[str]] = None
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if " = " in body:
                    k, v = body.split(" = ", 1)
                    meta[k.strip()] = v
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append([float(x) for x in line.split(",")])
    if header is None:
        raise ValueError(f"{path} has no header row")
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}, meta
