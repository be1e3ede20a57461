"""Versioned binary checkpoint: a JSON header plus named little-endian tensors.

Layout::

    b"TGCK" | u32 version | u64 header_len | header JSON (utf-8)
    u32 n_tensors
    per tensor: u32 name_len | name | u8 dtype (0=f8, 1=i8) | u32 ndim | u64 shape[ndim] | data
"""
from __future__ import annotations

import json
import struct

import numpy as np

MAGIC = b"TGCK"
VERSION = 1
_DTYPES = {0: np.dtype("<f8"), 1: np.dtype("<i8")}


class CheckpointError(ValueError):
    pass


def save(path, tensors: dict, header: dict) -> None:
    with open(path, "wb") as fh:
        hb = json.dumps(header, sort_keys=True).encode("utf-8")
        fh.write(MAGIC + struct.pack("<IQ", VERSION, len(hb)) + hb)
        fh.write(struct.pack("<I", len(tensors)))
        for name in sorted(tensors):
            a = np.asarray(tensors[name])
            if a.dtype.kind == "f":
                code, a = 0, a.astype("<f8")
            elif a.dtype.kind in "iub":
                code, a = 1, a.astype("<i8")
            else:
                raise CheckpointError(f"unsupported dtype {a.dtype} for {name}")
            nb = name.encode("utf-8")
            fh.write(struct.pack("<I", len(nb)) + nb + struct.pack("<BI", code, a.ndim))
            fh.write(struct.pack(f"<{a.ndim}Q", *a.shape))
            fh.write(np.ascontiguousarray(a).tobytes())


def load(path) -> tuple[dict, dict]:
    """Return ``(tensors, header)``."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    try:
        version, hlen = struct.unpack_from("<IQ", data, 4)
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        pos = 16
        header = json.loads(data[pos:pos + hlen].decode("utf-8"))
        pos += hlen
        (count,) = struct.unpack_from("<I", data, pos)
        pos += 4
        tensors = {}
        for _ in range(count):
            (nlen,) = struct.unpack_from("<I", data, pos)
            pos += 4
            name = data[pos:pos + nlen].decode("utf-8")
            pos += nlen
            code, ndim = struct.unpack_from("<BI", data, pos)
            pos += 5
            shape = struct.unpack_from(f"<{ndim}Q", data, pos)
            pos += 8 * ndim
            dt = _DTYPES[code]
            size = int(np.prod(shape, dtype=np.int64)) * dt.itemsize
            if pos + size > len(data):
                raise CheckpointError(f"{path}: truncated tensor {name}")
            tensors[name] = np.frombuffer(data, dtype=dt, count=size // dt.itemsize,
                                          offset=pos).reshape(shape).astype(dt.newbyteorder("="))
            pos += size
    except (struct.error, KeyError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupt checkpoint ({exc})") from exc
    return tensors, header
