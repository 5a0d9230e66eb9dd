"""Claim embeddings: providers, the patent claim matrix, and CEMB files.

A provider exposes ``d_e`` and ``token_vectors(tokens) -> (n_tokens, d_e)``;
``build_claim_matrix`` averages the token vectors of each claim into one
row. Precomputed claim vectors (e.g. exported from a pre-trained language
model) travel in the CEMB binary format and bypass the provider entirely.

CEMB layout (little-endian):
    magic b"CEMB" | version u32=1 | d_e u32 | record count u64
    per record: id length u16 | id bytes UTF-8 | claim count u16
                | claim_count * d_e float32, row-major
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import TokenizedClaim
from .errors import FormatError, ShapeError

CEMB_MAGIC = b"CEMB"
CEMB_VERSION = 1


@dataclass
class ClaimMatrix:
    """Fixed-size matrix of claim vectors; rows beyond ``active_count`` are zero."""

    data: np.ndarray  # (m, d_e)
    active_count: int

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 2:
            raise ShapeError("claim matrix must be 2-D")
        if not 0 <= self.active_count <= self.data.shape[0]:
            raise ShapeError(
                f"active_count {self.active_count} outside 0..{self.data.shape[0]}"
            )
        if not np.isfinite(self.data).all():
            raise FormatError("claim matrix contains non-finite values")
        if self.active_count < self.data.shape[0] and np.any(
            self.data[self.active_count:]
        ):
            raise ShapeError("padding rows of a claim matrix must be zero")

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def d_e(self) -> int:
        return self.data.shape[1]


class HashedEmbedder:
    """Feature-hashing stand-in for a language model.

    Each token maps to a signed unit vector at a hashed index; the hash is
    keyed blake2b of the token bytes, so vectors are bitwise reproducible
    across runs and platforms.
    """

    def __init__(self, d_e: int, seed: int = 0, dtype=np.float32):
        if d_e < 1:
            raise ValueError("d_e must be >= 1")
        self.d_e = d_e
        self.seed = seed
        self.dtype = dtype
        self._key = seed.to_bytes(8, "little", signed=True)

    def _slot(self, token: str) -> tuple[int, float]:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8,
                                 key=self._key).digest()
        h = int.from_bytes(digest, "little")
        index = (h & (1 << 63) - 1) % self.d_e
        sign = 1.0 if h >> 63 == 0 else -1.0
        return index, sign

    def token_vectors(self, tokens: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(tokens), self.d_e), dtype=self.dtype)
        for i, tok in enumerate(tokens):
            index, sign = self._slot(tok)
            out[i, index] = sign
        return out

    def claim_vector(self, tokens: Sequence[str]) -> np.ndarray:
        return mean_claim_vector(self, tokens)


def mean_claim_vector(provider, tokens: Sequence[str]) -> np.ndarray:
    """One claim vector: the mean of the claim's token vectors, zero if empty."""
    if not tokens:
        return np.zeros(provider.d_e, dtype=getattr(provider, "dtype", np.float32))
    return provider.token_vectors(tokens).mean(axis=0)


def build_claim_matrix(
    claims: Sequence[TokenizedClaim], provider, m: int
) -> ClaimMatrix:
    """Assemble the per-patent claim matrix: first ``m`` claims, zero padding."""
    if m < 1:
        raise ValueError("m must be >= 1")
    k = min(len(claims), m)
    rows = np.zeros((m, provider.d_e), dtype=getattr(provider, "dtype", np.float32))
    for i in range(k):
        rows[i] = mean_claim_vector(provider, claims[i].tokens)
    return ClaimMatrix(rows, k)


def matrix_from_rows(rows: np.ndarray, m: int) -> ClaimMatrix:
    """Claim matrix from precomputed claim vectors (first m kept, zero padded)."""
    rows = np.asarray(rows, dtype=np.float32)
    if rows.ndim != 2:
        raise ShapeError("claim rows must be 2-D")
    k = min(rows.shape[0], m)
    out = np.zeros((m, rows.shape[1]), dtype=np.float32)
    out[:k] = rows[:k]
    return ClaimMatrix(out, k)


@dataclass
class EmbeddingRecord:
    patent_id: str
    vectors: np.ndarray = field(repr=False)  # (n_claims, d_e) float32


def write_embeddings(path, entries: Sequence[tuple[str, np.ndarray]]):
    """Write (patent_id, claim vectors) pairs as a CEMB file."""
    d_e = None
    for patent_id, vectors in entries:
        vectors = np.asarray(vectors)
        if vectors.ndim != 2:
            raise ShapeError(f"{patent_id}: claim vectors must be 2-D")
        if d_e is None:
            d_e = vectors.shape[1]
        elif vectors.shape[1] != d_e:
            raise ShapeError(
                f"{patent_id}: d_e {vectors.shape[1]} differs from {d_e}"
            )
    if d_e is None:
        raise ValueError("cannot write an empty embedding file")
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


def _read_exact(fh, n: int, what: str) -> bytes:
    offset = fh.tell()
    buf = fh.read(n)
    if len(buf) != n:
        raise FormatError(f"truncated CEMB file at byte {offset}: expected {what}")
    return buf


def read_embeddings(path) -> list[EmbeddingRecord]:
    """Read a CEMB file back; float bit patterns are preserved exactly."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CEMB_MAGIC:
            raise FormatError("not a CEMB file")
        version, d_e, count = struct.unpack("<IIQ", _read_exact(fh, 16, "header"))
        if version != CEMB_VERSION:
            raise FormatError(f"unsupported CEMB version {version}")
        if d_e < 1:
            raise FormatError(f"invalid d_e {d_e}")
        records = []
        for _ in range(count):
            (id_len,) = struct.unpack("<H", _read_exact(fh, 2, "id length"))
            patent_id = _read_exact(fh, id_len, "patent id").decode("utf-8")
            (n_claims,) = struct.unpack("<H", _read_exact(fh, 2, "claim count"))
            raw = _read_exact(fh, n_claims * d_e * 4, f"{n_claims} claim rows")
            vectors = np.frombuffer(raw, dtype="<f4").reshape(n_claims, d_e).copy()
            records.append(EmbeddingRecord(patent_id, vectors))
        trailing = fh.read(1)
        if trailing:
            raise FormatError(f"trailing bytes after last record at byte {fh.tell() - 1}")
    return records


def embeddings_d_e(records: Sequence[EmbeddingRecord]) -> int:
    if not records:
        raise ValueError("no embedding records")
    return records[0].vectors.shape[1]
