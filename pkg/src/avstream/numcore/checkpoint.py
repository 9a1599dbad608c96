"""Single-file checkpoints: version tag, name -> (shape, raw f64 LE) table, seed.

Layout: one magic line, one JSON header line (version, seed, config, tensor
table with byte offsets), then the concatenated little-endian float64 buffers.
Round-trips are bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DataError

MAGIC = b"AVSTREAM-CKPT\n"
VERSION = 1


def save_checkpoint(path, params: dict[str, np.ndarray], seed: int, config: dict | None = None) -> None:
    path = Path(path)
    table = []
    offset = 0
    blobs = []
    for name, arr in params.items():
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        raw = arr.astype("<f8", copy=False).tobytes()
        table.append({"name": name, "shape": list(arr.shape), "offset": offset, "nbytes": len(raw)})
        blobs.append(raw)
        offset += len(raw)
    header = {"version": VERSION, "seed": int(seed), "config": config or {}, "tensors": table}
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for raw in blobs:
            f.write(raw)


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], int, dict]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    with open(path, "rb") as f:
        magic = f.readline()
        if magic != MAGIC:
            raise DataError(f"not a checkpoint file: {path}")
        try:
            header = json.loads(f.readline().decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as e:
            raise DataError(f"corrupt checkpoint header in {path}: {e}") from e
        if header.get("version") != VERSION:
            raise DataError(f"unsupported checkpoint version {header.get('version')} in {path}")
        payload = f.read()
    params: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        lo, hi = entry["offset"], entry["offset"] + entry["nbytes"]
        if hi > len(payload):
            raise DataError(f"truncated checkpoint payload in {path}")
        arr = np.frombuffer(payload[lo:hi], dtype="<f8").astype(np.float64).reshape(entry["shape"])
        params[entry["name"]] = arr
    return params, int(header["seed"]), header.get("config", {})
