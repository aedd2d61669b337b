"""RGRD: a minimal little-endian binary container for float64 arrays.

Layout: b"RGRD", u16 version (=1), u16 flags (=0), u16 ndim, u16 reserved,
ndim x u64 dims, then the row-major float64 payload.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

MAGIC = b"RGRD"
VERSION = 1
MAX_NDIM = 8
_HEAD = struct.Struct("<4sHHHH")


def encode(array) -> bytes:
    a = np.asarray(array)
    if a.ndim == 0 or a.ndim > MAX_NDIM:
        raise FormatError(f"RGRD stores 1 to {MAX_NDIM} dimensions, got {a.ndim}")
    head = _HEAD.pack(MAGIC, VERSION, 0, a.ndim, 0) + struct.pack(f"<{a.ndim}Q", *a.shape)
    return head + np.ascontiguousarray(a, dtype="<f8").tobytes(order="C")


def decode(buf: bytes) -> np.ndarray:
    if len(buf) < _HEAD.size:
        raise FormatError("file shorter than the RGRD header")
    magic, version, flags, ndim, _ = _HEAD.unpack_from(buf)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported RGRD version {version}")
    if flags != 0:
        raise FormatError(f"unsupported RGRD flags {flags:#x}")
    if not 1 <= ndim <= MAX_NDIM:
        raise FormatError(f"ndim {ndim} outside 1..{MAX_NDIM}")
    off = _HEAD.size + 8 * ndim
    if len(buf) < off:
        raise FormatError("truncated dimension table")
    dims = struct.unpack_from(f"<{ndim}Q", buf, _HEAD.size)
    count = int(np.prod(dims, dtype=np.uint64))
    if len(buf) - off != 8 * count:
        raise FormatError(f"payload has {len(buf) - off} bytes, expected {8 * count}")
    return np.frombuffer(buf, dtype="<f8", count=count, offset=off).astype(float).reshape(dims)


def write_grid(path, array) -> None:
    Path(path).write_bytes(encode(array))


def read_grid(path) -> np.ndarray:
    return decode(Path(path).read_bytes())
