"""Versioned binary checkpoint container for network parameters.

Layout (all integers little-endian u32):

    magic "IUPE" | format version | arch JSON length | arch JSON (utf-8)
    then per parameter, in sorted name order:
    name length | name (utf-8) | rank | dims... | float32 data (LE)

Files written from the same parameters are byte-identical, and a
load/save round trip reproduces the file exactly.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .autodiff import Tensor
from .nets import NetParams

MAGIC = b"IUPE"
FORMAT_VERSION = 1

__all__ = ["MAGIC", "FORMAT_VERSION", "save_checkpoint", "load_checkpoint",
           "checkpoint_bytes"]


def checkpoint_bytes(net: NetParams) -> bytes:
    arch_json = json.dumps(net.arch, sort_keys=True).encode("utf-8")
    chunks = [MAGIC, struct.pack("<I", FORMAT_VERSION),
              struct.pack("<I", len(arch_json)), arch_json]
    for name in sorted(net.params):
        data = np.ascontiguousarray(net.params[name].data, dtype="<f4")
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<I", data.ndim))
        chunks.append(struct.pack(f"<{data.ndim}I", *data.shape))
        chunks.append(data.tobytes())
    return b"".join(chunks)


def save_checkpoint(net: NetParams, path: str | Path) -> None:
    Path(path).write_bytes(checkpoint_bytes(net))


class CheckpointError(ValueError):
    pass


def load_checkpoint(path: str | Path) -> NetParams:
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC:
        raise CheckpointError(f"{path}: bad magic bytes")
    try:
        off = 4
        version, = struct.unpack_from("<I", blob, off)
        off += 4
        if version != FORMAT_VERSION:
            raise CheckpointError(f"{path}: unsupported format version {version}")
        arch_len, = struct.unpack_from("<I", blob, off)
        off += 4
        arch = json.loads(blob[off:off + arch_len].decode("utf-8"))
        off += arch_len

        params: dict[str, Tensor] = {}
        while off < len(blob):
            name_len, = struct.unpack_from("<I", blob, off)
            off += 4
            name = blob[off:off + name_len].decode("utf-8")
            off += name_len
            rank, = struct.unpack_from("<I", blob, off)
            off += 4
            dims = struct.unpack_from(f"<{rank}I", blob, off)
            off += 4 * rank
            count = int(np.prod(dims, dtype=np.int64)) if rank else 1
            if off + 4 * count > len(blob):
                raise CheckpointError(f"{path}: truncated parameter data")
            data = np.frombuffer(blob, dtype="<f4", count=count, offset=off)
            off += 4 * count
            params[name] = Tensor(data.reshape(dims).astype(np.float64))
    except (struct.error, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: malformed checkpoint ({exc})") from exc
    if off != len(blob):
        raise CheckpointError(f"{path}: trailing bytes after last parameter")
    return NetParams(arch=arch, params=params)
