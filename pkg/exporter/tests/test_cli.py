"""Command-line interface: exit codes, output, and engine interoperability."""

import subprocess
import sys

import pytest

from cembexport.cli import main

MAX_TOKENS = ["--max-tokens", "48"]


def _run(model_dir, corpus, out, *extra):
    return main([
        "--model", model_dir,
        "--corpus", str(corpus),
        "--out", str(out),
        *MAX_TOKENS,
        "--batch-size", "3",
        *extra,
    ])


class TestArguments:
    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "cembexport" in capsys.readouterr().out

    def test_unknown_flag(self, capsys):
        assert main(["--bogus"]) == 2

    def test_missing_required_flags(self, capsys):
        assert main([]) == 2
        err = capsys.readouterr().err
        for flag in ("--model", "--corpus", "--out"):
            assert flag in err

    def test_bad_claim_filter(self):
        assert main(["--model", "m", "--corpus", "c", "--out", "o",
                     "--claim-filter", "dependent_only"]) == 2

    def test_non_positive_batch_size(self):
        assert main(["--model", "m", "--corpus", "c", "--out", "o",
                     "--batch-size", "0"]) == 2

    def test_list_models(self, capsys):
        assert main(["--list-models"]) == 0
        out = capsys.readouterr().out
        lines = [line for line in out.splitlines() if line]
        assert len(lines) == 5
        assert "patentbert\tanferico/bert-for-patents" in lines

    def test_module_invocation(self):
        result = subprocess.run(
            [sys.executable, "-m", "cembexport.cli", "--list-models"],
            capture_output=True, text=True,
        )
        assert result.returncode == 0
        assert "pubmedbert" in result.stdout


class TestFailures:
    def test_missing_corpus_file(self, model_dir, tmp_path, capsys):
        assert _run(model_dir, tmp_path / "nope.jsonl", tmp_path / "x.cemb") == 3

    def test_malformed_corpus(self, model_dir, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("{not json\n", encoding="utf-8")
        assert _run(model_dir, bad, tmp_path / "x.cemb") == 4
        assert "invalid JSON" in capsys.readouterr().err

    def test_unloadable_model(self, corpus_path, tmp_path, capsys):
        assert _run(str(tmp_path / "missing"), corpus_path, tmp_path / "x.cemb") == 5
        assert "cannot load model" in capsys.readouterr().err

    def test_default_max_tokens_too_large_for_model(self, model_dir, corpus_path, tmp_path, capsys):
        code = main([
            "--model", model_dir, "--corpus", str(corpus_path),
            "--out", str(tmp_path / "x.cemb"),
        ])
        assert code == 5
        assert "context window" in capsys.readouterr().err

    def test_overwrite_guard(self, model_dir, corpus_path, tmp_path, capsys):
        out = tmp_path / "x.cemb"
        out.write_bytes(b"existing")
        assert _run(model_dir, corpus_path, out) == 6
        assert "refusing to overwrite" in capsys.readouterr().err
        assert out.read_bytes() == b"existing"
        assert _run(model_dir, corpus_path, out, "--force") == 0
        assert out.read_bytes()[:4] == b"CEMB"


class TestEndToEnd:
    def test_export_and_engine_check(self, model_dir, corpus_path, tmp_path, capsys):
        out = tmp_path / "claims.cemb"
        assert _run(model_dir, corpus_path, out) == 0
        stdout = capsys.readouterr().out
        assert "4 patents, 6 claims, d_e=16" in stdout
        assert "1 zero-token claims" in stdout

        # The screening engine's own validator must accept the file.
        result = subprocess.run(
            [sys.executable, "-m", "claimscreen.cli", "embed",
             "--corpus", str(corpus_path), "--check", str(out)],
            capture_output=True, text=True,
        )
        assert result.returncode == 0, result.stderr
        assert "OK: 4 patents covered, d_e=16" in result.stdout

    def test_engine_check_catches_filter_mismatch(self, model_dir, corpus_path, tmp_path):
        out = tmp_path / "all.cemb"
        assert _run(model_dir, corpus_path, out, "--claim-filter", "all") == 0
        result = subprocess.run(
            [sys.executable, "-m", "claimscreen.cli", "embed",
             "--corpus", str(corpus_path), "--check", str(out)],
            capture_output=True, text=True,
        )
        # engine default filter is independent_only; counts disagree for EX1
        assert result.returncode == 4
