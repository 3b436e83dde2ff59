"""Binary checkpoint format for named float64 tensors.

Layout (all integers little-endian):

    magic   4 bytes  b"TVCK"
    version u32      format version, currently 1
    seed    i64      seed the parameters were produced with
    count   u32      number of tensors
    then per tensor:
        name_len u32, name utf-8 bytes
        ndim     u32, dims u64 each
        data     float64 little-endian, row-major
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"TVCK"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, tensors: dict[str, np.ndarray], seed: int) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Iq", VERSION, int(seed)))
        fh.write(struct.pack("<I", len(tensors)))
        for name, arr in tensors.items():
            arr = np.asarray(arr, dtype=np.float64)
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
            fh.write(arr.astype("<f8").tobytes(order="C"))


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], int]:
    """Returns (name -> array, seed)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
    version, seed = struct.unpack_from("<Iq", data, 4)
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")
    (count,) = struct.unpack_from("<I", data, 16)
    offset = 20
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<I", data, offset)
        offset += 4
        name = data[offset : offset + name_len].decode("utf-8")
        offset += name_len
        (ndim,) = struct.unpack_from("<I", data, offset)
        offset += 4
        shape = struct.unpack_from(f"<{ndim}Q", data, offset)
        offset += 8 * ndim
        n = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(data, dtype="<f8", count=n, offset=offset).reshape(shape)
        offset += 8 * n
        tensors[name] = arr.astype(np.float64)
    if offset != len(data):
        raise CheckpointError(f"{path}: trailing bytes after last tensor")
    return tensors, seed
