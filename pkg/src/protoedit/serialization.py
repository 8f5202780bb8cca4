"""Versioned binary checkpoint container.

Layout (all little-endian):
  magic "PECK" | version u8 | kind u16-len + utf8 | meta JSON u32-len + utf8 |
  block count u32 | per block: name u16-len + utf8, dtype u8-len + ascii,
  ndim u8, dims u32 each, raw array bytes.

The ``kind`` string separates editor checkpoints from matcher checkpoints so
one cannot be loaded as the other; ``meta`` carries hyperparameters and the
vocab hash.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

_MAGIC = b"PECK"
_VERSION = 1


def write_checkpoint(
    path: str | Path,
    kind: str,
    meta: dict,
    blocks: dict[str, np.ndarray],
) -> None:
    meta_bytes = json.dumps(meta, sort_keys=True).encode("utf-8")
    kind_bytes = kind.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<B", _VERSION))
        fh.write(struct.pack("<H", len(kind_bytes)))
        fh.write(kind_bytes)
        fh.write(struct.pack("<I", len(meta_bytes)))
        fh.write(meta_bytes)
        fh.write(struct.pack("<I", len(blocks)))
        for name, arr in blocks.items():
            name_bytes = name.encode("utf-8")
            dtype_bytes = arr.dtype.str.lstrip("<>=|").encode("ascii")
            fh.write(struct.pack("<H", len(name_bytes)))
            fh.write(name_bytes)
            fh.write(struct.pack("<B", len(dtype_bytes)))
            fh.write(dtype_bytes)
            fh.write(struct.pack("<B", arr.ndim))
            for dim in arr.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(np.ascontiguousarray(arr).astype(f"<{dtype_bytes.decode()}").tobytes())


def read_checkpoint(
    path: str | Path, expected_kind: str | None = None
) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a checkpoint file (bad magic {magic!r})")
        (version,) = struct.unpack("<B", fh.read(1))
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        (kind_len,) = struct.unpack("<H", fh.read(2))
        kind = fh.read(kind_len).decode("utf-8")
        if expected_kind is not None and kind != expected_kind:
            raise ValueError(f"{path}: checkpoint kind {kind!r}, expected {expected_kind!r}")
        (meta_len,) = struct.unpack("<I", fh.read(4))
        meta = json.loads(fh.read(meta_len).decode("utf-8"))
        (n_blocks,) = struct.unpack("<I", fh.read(4))
        blocks = {}
        for _ in range(n_blocks):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode("utf-8")
            (dtype_len,) = struct.unpack("<B", fh.read(1))
            dtype = fh.read(dtype_len).decode("ascii")
            (ndim,) = struct.unpack("<B", fh.read(1))
            shape = tuple(struct.unpack("<I", fh.read(4))[0] for _ in range(ndim))
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * np.dtype(dtype).itemsize)
            blocks[name] = np.frombuffer(raw, dtype=f"<{dtype}").reshape(shape).copy()
    return meta, blocks


def file_sha256(path: str | Path, prefix_len: int = 16) -> str:
    """Short content hash used by /health to identify loaded artifacts."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()[:prefix_len]
