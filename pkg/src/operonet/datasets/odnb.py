"""ODNB: the binary dataset container.

Layout (little endian)::

    b"ODNB" | u32 version=1 | u64 m, d_x, d_y, N, Q
    f64 sensor_locations[m*d_x] | f64 query_points[Q*d_y]
    f64 inputs[N*m] | f64 targets[N*Q]
    u64 meta_len | meta (UTF-8 JSON)
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from .dataset import OperatorDataset

MAGIC = b"ODNB"
VERSION = 1
_HEADER = struct.Struct("<4sIQQQQQ")


class FormatError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


def dataset_bytes(ds: OperatorDataset) -> bytes:
    meta = json.dumps(ds.meta, sort_keys=True).encode("utf-8")
    parts = [_HEADER.pack(MAGIC, VERSION, ds.m, ds.d_x, ds.d_y, ds.n, ds.q)]
    for arr in (ds.sensor_locations, ds.query_points, ds.inputs, ds.targets):
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    parts.append(struct.pack("<Q", len(meta)))
    parts.append(meta)
    return b"".join(parts)


def write_dataset(ds: OperatorDataset, path) -> None:
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(dataset_bytes(ds))
    os.replace(tmp, path)


def parse_dataset(buf: bytes) -> OperatorDataset:
    if len(buf) < _HEADER.size:
        raise FormatError("truncated header", len(buf))
    magic, version, m, d_x, d_y, n, q = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", 0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    off = _HEADER.size
    arrays = []
    for shape in ((m, d_x), (q, d_y), (n, m), (n, q)):
        count = shape[0] * shape[1]
        end = off + 8 * count
        if end > len(buf):
            raise FormatError(f"truncated array of {count} values", off)
        arrays.append(np.frombuffer(buf, dtype="<f8", count=count, offset=off)
                      .astype(np.float64).reshape(shape))
        off = end
    if off + 8 > len(buf):
        raise FormatError("missing metadata length", off)
    (meta_len,) = struct.unpack_from("<Q", buf, off)
    off += 8
    if off + meta_len > len(buf):
        raise FormatError("truncated metadata", off)
    try:
        meta = json.loads(buf[off:off + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable metadata: {exc}", off) from None
    off += meta_len
    if off != len(buf):
        raise FormatError(f"{len(buf) - off} trailing bytes", off)
    return OperatorDataset(*arrays, meta=meta)


def read_dataset(path) -> OperatorDataset:
    with open(path, "rb") as fh:
        return parse_dataset(fh.read())
