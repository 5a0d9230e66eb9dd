"""Versioned binary checkpoints for model parameters (CHAN format).

Layout, all little-endian:

    magic   4 bytes  b"CHAN"
    u32     format version (currently 1)
    u32     d_e
    u32     m
    u32     n_encoders
    u32     ffn_mult
    f64     dropout rate
    u32     block count
    per block:
        u16     name length in bytes
        bytes   name, UTF-8
        u32     rows
        u32     cols
        f32[]   rows*cols values, row-major

Blocks keep their written order. Round-trips are bit-exact: values are
stored as float32 and read back with the same bit patterns.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError

CHAN_MAGIC = b"CHAN"
CHAN_VERSION = 1

_HEADER = struct.Struct("<4sIIIIIdI")
_BLOCK_HEAD = struct.Struct("<H")
_BLOCK_DIMS = struct.Struct("<II")


@dataclass
class Checkpoint:
    """A parsed checkpoint: the config scalars plus named float32 matrices."""

    d_e: int
    m: int
    n_encoders: int
    ffn_mult: int
    dropout: float
    blocks: dict[str, np.ndarray]


def write_checkpoint(
    path,
    *,
    d_e: int,
    m: int,
    n_encoders: int,
    ffn_mult: int,
    dropout: float,
    blocks: dict[str, np.ndarray],
) -> None:
    for value, label in ((d_e, "d_e"), (m, "m"), (n_encoders, "n_encoders"), (ffn_mult, "ffn_mult")):
        if value < 1:
            raise ValueError(f"{label} must be >= 1, got {value}")
    if not 0.0 <= dropout < 1.0:
        raise ValueError(f"dropout must lie in [0, 1), got {dropout}")
    if not blocks:
        raise ValueError("checkpoint needs at least one parameter block")

    encoded = []
    for name, array in blocks.items():
        name_bytes = name.encode("utf-8")
        if not name_bytes:
            raise ValueError("block names must be non-empty")
        if len(name_bytes) > 0xFFFF:
            raise ValueError(f"block name too long: {name!r}")
        arr = np.ascontiguousarray(array, dtype=np.float32)
        if arr.ndim != 2:
            raise ValueError(f"block {name!r} must be 2-D, got shape {array.shape}")
        if not np.isfinite(arr).all():
            raise ValueError(f"block {name!r} contains NaN or Inf")
        encoded.append((name_bytes, arr))

    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                CHAN_MAGIC, CHAN_VERSION, d_e, m, n_encoders, ffn_mult, dropout, len(encoded)
            )
        )
        for name_bytes, arr in encoded:
            fh.write(_BLOCK_HEAD.pack(len(name_bytes)))
            fh.write(name_bytes)
            fh.write(_BLOCK_DIMS.pack(arr.shape[0], arr.shape[1]))
            fh.write(arr.tobytes(order="C"))


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise FormatError(
            f"truncated checkpoint: expected {n} bytes for {what} "
            f"at offset {fh.tell() - len(data)}, got {len(data)}"
        )
    return data


def read_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        header = _read_exact(fh, _HEADER.size, "header")
        magic, version, d_e, m, n_encoders, ffn_mult, dropout, count = _HEADER.unpack(header)
        if magic != CHAN_MAGIC:
            raise FormatError(f"not a CHAN checkpoint file: bad magic {magic!r}")
        if version != CHAN_VERSION:
            raise FormatError(f"unsupported CHAN version {version} (expected {CHAN_VERSION})")
        if d_e < 1 or m < 1 or n_encoders < 1 or ffn_mult < 1:
            raise FormatError("checkpoint config fields must be >= 1")
        if not 0.0 <= dropout < 1.0:
            raise FormatError(f"checkpoint dropout {dropout} outside [0, 1)")

        blocks: dict[str, np.ndarray] = {}
        for i in range(count):
            (name_len,) = _BLOCK_HEAD.unpack(_read_exact(fh, _BLOCK_HEAD.size, f"block {i} name length"))
            name = _read_exact(fh, name_len, f"block {i} name").decode("utf-8")
            if name in blocks:
                raise FormatError(f"duplicate block name {name!r}")
            rows, cols = _BLOCK_DIMS.unpack(_read_exact(fh, _BLOCK_DIMS.size, f"block {name!r} dims"))
            raw = _read_exact(fh, rows * cols * 4, f"block {name!r} data")
            blocks[name] = np.frombuffer(raw, dtype="<f4").reshape(rows, cols).copy()
        trailing = fh.read(1)
        if trailing:
            raise FormatError(f"trailing bytes after {count} blocks at offset {fh.tell() - 1}")
    return Checkpoint(
        d_e=d_e, m=m, n_encoders=n_encoders, ffn_mult=ffn_mult, dropout=dropout, blocks=blocks
    )
