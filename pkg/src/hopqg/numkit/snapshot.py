"""Tensor snapshot format used by checkpointing.

A snapshot is a directory holding:
  manifest.json - tensor table [{name, shape, dtype, offset}] plus arbitrary
                  caller metadata under "extra"
  tensors.bin   - the flat little-endian array payload, entries at the byte
                  offsets given by the manifest
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ValidationError

_MANIFEST = "manifest.json"
_BLOB = "tensors.bin"

_DTYPES = {"<f8": np.dtype("<f8"), "<f4": np.dtype("<f4")}


def write_snapshot(path, arrays: dict[str, np.ndarray], extra: dict | None = None) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    entries = []
    offset = 0
    with open(path / _BLOB, "wb") as blob:
        for name in sorted(arrays):
            arr = np.ascontiguousarray(arrays[name])
            dtype = "<f8" if arr.dtype == np.float64 else "<f4"
            raw = arr.astype(_DTYPES[dtype], copy=False).tobytes()
            entries.append(
                {"name": name, "shape": list(arr.shape), "dtype": dtype, "offset": offset}
            )
            blob.write(raw)
            offset += len(raw)
    manifest = {"tensors": entries, "extra": extra or {}}
    with open(path / _MANIFEST, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)


def read_snapshot(path) -> tuple[dict[str, np.ndarray], dict]:
    path = Path(path)
    try:
        with open(path / _MANIFEST, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"no snapshot manifest at {path}")
    raw = (path / _BLOB).read_bytes()
    arrays = {}
    for entry in manifest["tensors"]:
        dtype = _DTYPES[entry["dtype"]]
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        stop = start + count * dtype.itemsize
        arrays[entry["name"]] = np.frombuffer(raw[start:stop], dtype=dtype).reshape(shape).copy()
    return arrays, manifest.get("extra", {})
