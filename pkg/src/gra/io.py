"""Versioned binary container for parameter checkpoints and representation matrices.

Layout (all integers little-endian)::

    magic      4 bytes   b"GRAM"
    version    uint32    currently 1
    count      uint32    number of named matrices
    per matrix:
      name_len uint32, name (UTF-8)
      rows     uint64, cols uint64
      values   rows * cols float64, row-major
"""

import struct
from pathlib import Path

import numpy as np

from .exceptions import DataError

MAGIC = b"GRAM"
VERSION = 1


def save_matrices(path, matrices):
    """Write an ordered mapping of name -> 2-d float array."""
    chunks = [MAGIC, struct.pack("<II", VERSION, len(matrices))]
    for name, value in matrices.items():
        arr = np.asarray(value, dtype="<f8")
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise ValueError(f"{name}: only 2-d matrices can be stored")
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<QQ", *arr.shape))
        chunks.append(np.ascontiguousarray(arr).tobytes())
    try:
        Path(path).write_bytes(b"".join(chunks))
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def load_matrices(path):
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if blob[:4] != MAGIC:
        raise DataError(f"{path}: not a matrix container (bad magic)")
    try:
        version, count = struct.unpack_from("<II", blob, 4)
        if version != VERSION:
            raise DataError(f"{path}: unsupported container version {version}")
        offset = 12
        out = {}
        for _ in range(count):
            (name_len,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            name = blob[offset:offset + name_len].decode("utf-8")
            offset += name_len
            rows, cols = struct.unpack_from("<QQ", blob, offset)
            offset += 16
            size = rows * cols * 8
            if offset + size > len(blob):
                raise DataError(f"{path}: truncated matrix {name!r}")
            out[name] = np.frombuffer(blob, dtype="<f8", count=rows * cols,
                                      offset=offset).reshape(rows, cols).astype(np.float64)
            offset += size
    except struct.error as exc:
        raise DataError(f"{path}: truncated container ({exc})") from None
    return out


def save_representations(path, reps):
    save_matrices(path, {"H": reps.matrix if hasattr(reps, "matrix") else reps})


def load_representations(path):
    matrices = load_matrices(path)
    if "H" not in matrices:
        raise DataError(f"{path}: no representation matrix 'H'")
    return matrices["H"]


def export_csv(path, matrix):
    np.savetxt(path, np.asarray(matrix, dtype=np.float64), delimiter=",", fmt="%.17g")
