"""Command-line interface: export claim embeddings to a CEMB file.

Exit codes follow the screening engine's convention:
    0 success | 1 internal error | 2 usage | 3 missing file
    4 data format | 5 configuration (model load, context window)
    6 refusing to overwrite
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .corpus import CorpusError
from .export import ExportError, ExportJob, MODEL_IDS, export
from .writer import FormatError

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_DATA_FORMAT = 4
EXIT_CONFIG = 5
EXIT_OVERWRITE = 6


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cembexport",
        description="Export per-claim language-model embeddings as a CEMB file.",
    )
    parser.add_argument(
        "--model", help="short name (see --list-models), hub id, or local path"
    )
    parser.add_argument("--corpus", help="JSON-lines patent corpus")
    parser.add_argument("--out", help="output CEMB path")
    parser.add_argument(
        "--max-tokens", type=_positive_int, default=512,
        help="token truncation length (default 512)",
    )
    parser.add_argument("--device", default="cpu", help="torch device (default cpu)")
    parser.add_argument(
        "--batch-size", type=_positive_int, default=16,
        help="claims per inference batch (default 16)",
    )
    parser.add_argument(
        "--claim-filter", choices=("independent_only", "all"),
        default="independent_only",
        help="which claims to embed (default independent_only)",
    )
    parser.add_argument(
        "--force", action="store_true", help="overwrite an existing output file"
    )
    parser.add_argument(
        "--list-models", action="store_true",
        help="print the built-in model-name table and exit",
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    if args.list_models:
        for name, model_id in MODEL_IDS.items():
            print(f"{name}\t{model_id}")
        return EXIT_OK

    missing = [
        flag
        for flag, value in (
            ("--model", args.model),
            ("--corpus", args.corpus),
            ("--out", args.out),
        )
        if not value
    ]
    if missing:
        print(f"error: {', '.join(missing)} required", file=sys.stderr)
        return EXIT_USAGE

    out = Path(args.out)
    if out.exists() and not args.force:
        print(f"refusing to overwrite {out} (pass --force)", file=sys.stderr)
        return EXIT_OVERWRITE

    job = ExportJob(
        args.model,
        args.corpus,
        args.out,
        max_tokens=args.max_tokens,
        device=args.device,
        batch_size=args.batch_size,
        claim_filter=args.claim_filter,
    )
    try:
        report = export(job)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except (CorpusError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA_FORMAT
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    summary = (
        f"wrote {args.out}: {report.n_patents} patents, "
        f"{report.n_claims} claims, d_e={report.d_e}"
    )
    if report.zero_token_claims:
        summary += f", {report.zero_token_claims} zero-token claims"
    print(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
