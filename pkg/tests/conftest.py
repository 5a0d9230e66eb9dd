import json
import pathlib

import pytest

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture
def labeling_corpus() -> pathlib.Path:
    return FIXTURES / "labeling_corpus.jsonl"


@pytest.fixture
def write_corpus(tmp_path):
    """Write a list of patent dicts as a JSONL corpus; returns the path."""

    def _write(records, name="corpus.jsonl"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record) + "\n")
        return path

    return _write


def make_patent(patent_id="P1", grant="2000-06-15", claims=None, citations=()):
    """Loose corpus-line builder with sane defaults."""
    if claims is None:
        claims = ["A method comprising mixing a polymer with a solvent."]
    return {
        "patent_id": patent_id,
        "grant_date": grant,
        "claims": [
            c if isinstance(c, dict) else {"index": i + 1, "text": c}
            for i, c in enumerate(claims)
        ],
        "citations": [
            c if isinstance(c, dict) else {"citing_id": f"X{i}", "date": c}
            for i, c in enumerate(citations)
        ],
    }
