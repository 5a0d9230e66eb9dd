"""Claim matrices, the hashing embedder, and the CEMB binary format."""

import hashlib
import struct
import subprocess
import sys

import numpy as np
import pytest

from claimscreen.corpus import TokenizedClaim
from claimscreen.embed import (
    CEMB_MAGIC,
    CEMB_VERSION,
    ClaimMatrix,
    HashedEmbedder,
    build_claim_matrix,
    embeddings_d_e,
    matrix_from_rows,
    mean_claim_vector,
    read_embeddings,
    write_embeddings,
)
from claimscreen.errors import FormatError, ShapeError


class TestClaimMatrix:
    def test_properties(self):
        cm = ClaimMatrix(np.zeros((6, 3), dtype=np.float32), 2)
        assert cm.m == 6
        assert cm.d_e == 3
        assert cm.active_count == 2

    def test_rejects_non_2d(self):
        with pytest.raises(ShapeError):
            ClaimMatrix(np.zeros(4, dtype=np.float32), 1)

    def test_rejects_active_count_out_of_range(self):
        with pytest.raises(ShapeError):
            ClaimMatrix(np.zeros((3, 2), dtype=np.float32), 4)
        with pytest.raises(ShapeError):
            ClaimMatrix(np.zeros((3, 2), dtype=np.float32), -1)

    def test_rejects_non_finite(self):
        data = np.zeros((3, 2), dtype=np.float32)
        data[0, 0] = np.nan
        with pytest.raises(FormatError):
            ClaimMatrix(data, 1)

    def test_rejects_nonzero_padding(self):
        data = np.zeros((3, 2), dtype=np.float32)
        data[2, 1] = 0.5
        with pytest.raises(ShapeError):
            ClaimMatrix(data, 2)

    def test_full_matrix_has_no_padding_constraint(self):
        data = np.ones((3, 2), dtype=np.float32)
        cm = ClaimMatrix(data, 3)
        assert cm.active_count == 3

    def test_zero_active_rows_allowed_when_all_zero(self):
        cm = ClaimMatrix(np.zeros((2, 2), dtype=np.float32), 0)
        assert cm.active_count == 0


class TestHashedEmbedder:
    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            HashedEmbedder(0)

    def test_two_instances_same_seed_bitwise_identical(self):
        tokens = ["method", "treating", "glaucoma", "comprising", "zymurgel"]
        a = HashedEmbedder(32, seed=7).token_vectors(tokens)
        b = HashedEmbedder(32, seed=7).token_vectors(tokens)
        assert a.tobytes() == b.tobytes()

    def test_different_seeds_differ(self):
        tokens = [f"token{i}" for i in range(20)]
        a = HashedEmbedder(64, seed=0).token_vectors(tokens)
        b = HashedEmbedder(64, seed=1).token_vectors(tokens)
        assert a.tobytes() != b.tobytes()

    def test_repeated_token_repeats_its_row(self):
        emb = HashedEmbedder(16, seed=3)
        single = emb.token_vectors(["formulation"])
        double = emb.token_vectors(["formulation", "formulation"])
        assert np.array_equal(double[0], double[1])
        assert np.array_equal(double[0], single[0])

    def test_rows_are_signed_unit_vectors(self):
        emb = HashedEmbedder(24, seed=0)
        rows = emb.token_vectors([f"w{i}" for i in range(50)])
        for row in rows:
            nonzero = row[row != 0]
            assert nonzero.size == 1
            assert abs(nonzero[0]) == 1.0

    def test_identical_across_processes(self):
        tokens = ["alpha", "beta", "gamma", "delta"]
        local = HashedEmbedder(16, seed=5).token_vectors(tokens)
        script = (
            "import hashlib, sys\n"
            "from claimscreen.embed import HashedEmbedder\n"
            "v = HashedEmbedder(16, seed=5).token_vectors"
            "(['alpha', 'beta', 'gamma', 'delta'])\n"
            "sys.stdout.write(hashlib.sha256(v.tobytes()).hexdigest())\n"
        )
        out = subprocess.run(
            [sys.executable, "-c", script], capture_output=True, text=True, check=True
        )
        assert out.stdout.strip() == hashlib.sha256(local.tobytes()).hexdigest()


class TestClaimVectors:
    def test_mean_of_token_vectors(self):
        emb = HashedEmbedder(16, seed=0)
        tokens = ["ocular", "implant", "sustained", "release"]
        expected = emb.token_vectors(tokens).mean(axis=0)
        assert np.allclose(mean_claim_vector(emb, tokens), expected)

    def test_empty_claim_is_zero_vector(self):
        emb = HashedEmbedder(8, seed=0)
        vec = mean_claim_vector(emb, [])
        assert vec.shape == (8,)
        assert not vec.any()

    def test_build_claim_matrix_pads_with_zeros(self):
        emb = HashedEmbedder(8, seed=0)
        claims = [TokenizedClaim(["a", "b"]), TokenizedClaim(["c"])]
        cm = build_claim_matrix(claims, emb, m=5)
        assert cm.active_count == 2
        assert cm.m == 5
        assert not cm.data[2:].any()
        assert np.allclose(cm.data[0], mean_claim_vector(emb, ["a", "b"]))
        assert np.allclose(cm.data[1], mean_claim_vector(emb, ["c"]))

    def test_build_claim_matrix_truncates_to_m(self):
        emb = HashedEmbedder(8, seed=0)
        claims = [TokenizedClaim([f"tok{i}"]) for i in range(7)]
        cm = build_claim_matrix(claims, emb, m=4)
        assert cm.active_count == 4
        for i in range(4):
            assert np.allclose(cm.data[i], mean_claim_vector(emb, [f"tok{i}"]))

    def test_prefix_stability(self):
        # Rows for the first claims do not depend on how many claims follow.
        emb = HashedEmbedder(8, seed=0)
        claims = [TokenizedClaim([f"tok{i}"]) for i in range(6)]
        wide = build_claim_matrix(claims, emb, m=4)
        narrow = build_claim_matrix(claims[:2], emb, m=4)
        assert np.array_equal(wide.data[:2], narrow.data[:2])

    def test_empty_token_claim_counts_as_active(self):
        emb = HashedEmbedder(8, seed=0)
        cm = build_claim_matrix([TokenizedClaim([])], emb, m=3)
        assert cm.active_count == 1
        assert not cm.data.any()

    def test_rejects_bad_m(self):
        emb = HashedEmbedder(8, seed=0)
        with pytest.raises(ValueError):
            build_claim_matrix([TokenizedClaim(["a"])], emb, m=0)

    def test_matrix_from_rows(self):
        rows = np.arange(12, dtype=np.float32).reshape(3, 4)
        cm = matrix_from_rows(rows, m=5)
        assert cm.active_count == 3
        assert np.array_equal(cm.data[:3], rows)
        assert not cm.data[3:].any()
        clipped = matrix_from_rows(rows, m=2)
        assert clipped.active_count == 2
        assert np.array_equal(clipped.data, rows[:2])

    def test_matrix_from_rows_rejects_non_2d(self):
        with pytest.raises(ShapeError):
            matrix_from_rows(np.ones(3, dtype=np.float32), m=2)


def _sample_entries(rng):
    return [
        ("US6010682", rng.standard_normal((3, 4)).astype(np.float32)),
        ("EP-Ω-1", rng.standard_normal((1, 4)).astype(np.float32)),
        ("NOCLAIMS", np.zeros((0, 4), dtype=np.float32)),
    ]


class TestEmbeddingFile:
    def test_round_trip_is_bitwise_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        entries = _sample_entries(rng)
        # Include a negative zero so bit-pattern preservation is actually probed.
        entries[0][1][0, 0] = np.float32(-0.0)
        path = tmp_path / "claims.cemb"
        write_embeddings(path, entries)
        records = read_embeddings(path)
        assert [r.patent_id for r in records] == [pid for pid, _ in entries]
        for record, (_, vectors) in zip(records, entries):
            assert record.vectors.shape == vectors.shape
            assert record.vectors.tobytes() == vectors.tobytes()

    def test_rewrite_is_idempotent(self, tmp_path):
        entries = _sample_entries(np.random.default_rng(1))
        a, b = tmp_path / "a.cemb", tmp_path / "b.cemb"
        write_embeddings(a, entries)
        write_embeddings(b, entries)
        assert a.read_bytes() == b.read_bytes()

    def test_zero_claim_record_survives(self, tmp_path):
        path = tmp_path / "claims.cemb"
        write_embeddings(path, _sample_entries(np.random.default_rng(2)))
        records = read_embeddings(path)
        assert records[2].vectors.shape == (0, 4)

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "bogus.cemb"
        path.write_bytes(b"JUNK" + b"\x00" * 32)
        with pytest.raises(FormatError, match="not a CEMB file"):
            read_embeddings(path)

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "future.cemb"
        path.write_bytes(CEMB_MAGIC + struct.pack("<IIQ", CEMB_VERSION + 1, 4, 0))
        with pytest.raises(FormatError, match="version"):
            read_embeddings(path)

    def test_truncated_file_reports_byte_offset(self, tmp_path):
        path = tmp_path / "claims.cemb"
        write_embeddings(path, _sample_entries(np.random.default_rng(3)))
        blob = path.read_bytes()
        clipped = tmp_path / "clipped.cemb"
        clipped.write_bytes(blob[:-3])
        with pytest.raises(FormatError, match=r"at byte \d+"):
            read_embeddings(clipped)

    def test_trailing_bytes_rejected(self, tmp_path):
        path = tmp_path / "claims.cemb"
        write_embeddings(path, _sample_entries(np.random.default_rng(4)))
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(FormatError, match="trailing"):
            read_embeddings(path)

    def test_write_rejects_empty(self, tmp_path):
        with pytest.raises(ValueError):
            write_embeddings(tmp_path / "x.cemb", [])

    def test_write_rejects_mixed_dimensions(self, tmp_path):
        entries = [
            ("A", np.zeros((2, 4), dtype=np.float32)),
            ("B", np.zeros((2, 5), dtype=np.float32)),
        ]
        with pytest.raises(ShapeError):
            write_embeddings(tmp_path / "x.cemb", entries)

    def test_embeddings_d_e(self, tmp_path):
        path = tmp_path / "claims.cemb"
        write_embeddings(path, _sample_entries(np.random.default_rng(5)))
        assert embeddings_d_e(read_embeddings(path)) == 4
        with pytest.raises(ValueError):
            embeddings_d_e([])
