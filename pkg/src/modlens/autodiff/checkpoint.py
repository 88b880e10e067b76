"""Versioned binary checkpoint container.

Layout (all integers little-endian):

    bytes 0..3    magic b"MDLN"
    bytes 4..7    format version (uint32), currently 1
    bytes 8..15   header length in bytes (uint64)
    header        UTF-8 JSON: {"config": {...}, "tensors": [
                      {"name": str, "shape": [int], "offset": int, "nbytes": int}, ...]}
    data          tensor payloads, float64 little-endian, row-major,
                  at the offsets recorded in the header (relative to the
                  start of the data section)

The config echo is written verbatim and returned on load, so any
artifact can be reproduced from its own checkpoint.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Mapping

import numpy as np

from .tensor import Tensor, parameter

MAGIC = b"MDLN"
FORMAT_VERSION = 1


class CheckpointError(Exception):
    pass


def save_checkpoint(path: str | Path, params: Mapping[str, Tensor | np.ndarray],
                    config: dict) -> None:
    entries = []
    offset = 0
    blobs: list[bytes] = []
    for name in sorted(params.keys()):
        value = params[name]
        arr = value.data if isinstance(value, Tensor) else np.asarray(value)
        arr = np.ascontiguousarray(arr, dtype="<f8")
        blob = arr.tobytes()
        entries.append({"name": name, "shape": list(arr.shape),
                        "offset": offset, "nbytes": len(blob)})
        blobs.append(blob)
        offset += len(blob)
    header = json.dumps({"config": config, "tensors": entries},
                        sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path: str | Path) -> tuple[dict[str, Tensor], dict]:
    """Load named parameter tensors (trainable) and the config echo."""
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    version = struct.unpack("<I", raw[4:8])[0]
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    header_len = struct.unpack("<Q", raw[8:16])[0]
    header = json.loads(raw[16:16 + header_len].decode("utf-8"))
    data = raw[16 + header_len:]
    params: dict[str, Tensor] = {}
    for entry in header["tensors"]:
        lo, hi = entry["offset"], entry["offset"] + entry["nbytes"]
        arr = np.frombuffer(data[lo:hi], dtype="<f8").reshape(entry["shape"]).copy()
        params[entry["name"]] = parameter(arr)
    return params, header["config"]
