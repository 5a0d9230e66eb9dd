"""Writer for the CEMB claim-embedding interchange format.

CEMB layout (little-endian):
    magic b"CEMB" | version u32=1 | d_e u32 | record count u64
    per record: id length u16 | id bytes UTF-8 | claim count u16
                | claim_count * d_e float32, row-major

This module is self-contained on purpose: the format is the contract
between the exporter and the screening engine, and each side owns its own
implementation so that round-trip tests exercise the byte layout rather
than shared code.
"""

from __future__ import annotations

import struct
from typing import Sequence

import numpy as np

CEMB_MAGIC = b"CEMB"
CEMB_VERSION = 1


class FormatError(Exception):
    """Raised when embedding data cannot be serialized as CEMB."""


def write_cemb(path, entries: Sequence[tuple[str, np.ndarray]]):
    """Write (patent_id, claim vectors) pairs as a CEMB file.

    Every vectors array must be 2-D with the same number of columns; rows
    are written as little-endian float32 exactly as given.
    """
    d_e = None
    for patent_id, vectors in entries:
        vectors = np.asarray(vectors)
        if vectors.ndim != 2:
            raise FormatError(f"{patent_id}: claim vectors must be 2-D")
        if d_e is None:
            d_e = vectors.shape[1]
        elif vectors.shape[1] != d_e:
            raise FormatError(
                f"{patent_id}: d_e {vectors.shape[1]} differs from {d_e}"
            )
    if d_e is None:
        raise FormatError("cannot write an empty embedding file")
    if d_e < 1:
        raise FormatError(f"invalid d_e {d_e}")
    with open(path, "wb") as fh:
        fh.write(CEMB_MAGIC)
        fh.write(struct.pack("<IIQ", CEMB_VERSION, d_e, len(entries)))
        for patent_id, vectors in entries:
            id_bytes = patent_id.encode("utf-8")
            if len(id_bytes) > 0xFFFF:
                raise FormatError(f"patent id too long: {patent_id[:32]}...")
            n_claims = np.asarray(vectors).shape[0]
            if n_claims > 0xFFFF:
                raise FormatError(f"{patent_id}: too many claims ({n_claims})")
            fh.write(struct.pack("<H", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(struct.pack("<H", n_claims))
            fh.write(np.ascontiguousarray(vectors, dtype="<f4").tobytes())
