"""Minimal patent-corpus reader for embedding export.

The corpus file format is JSON Lines, one patent per line:

    {"patent_id": "6010700",
     "claims": [{"index": 1, "text": "A method of ..."}, ...]}

Labeling fields (grant dates, citations) may be present and are ignored;
the exporter only needs claim texts. Claim indices must be strictly
increasing; when any claim omits its index, positions (1-based) are used
for the whole patent. A claim is dependent iff its text references an
earlier claim ("claim N" / "claims N" with N < index) — the same rule the
screening engine applies, so filtered claim counts agree across the two
sides of the CEMB interchange.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass

INDEPENDENT = "independent"
DEPENDENT = "dependent"

_CLAIM_REF_RE = re.compile(r"\bclaims?\s+(\d+)", re.IGNORECASE)


class CorpusError(Exception):
    """Raised when a corpus file cannot be parsed."""


@dataclass
class Claim:
    index: int
    text: str
    claim_type: str  # INDEPENDENT or DEPENDENT


@dataclass
class Patent:
    patent_id: str
    claims: list[Claim]

    def __post_init__(self):
        if not self.patent_id:
            raise CorpusError("patent_id must be nonempty")
        if not self.claims:
            raise CorpusError(f"patent {self.patent_id} has no claims")


def classify_claim_type(text: str, index: int) -> str:
    """Classify one claim text as independent or dependent.

    References to the claim itself or later claims are malformed; they are
    ignored with a warning.
    """
    if not text:
        raise ValueError("claim text must be nonempty")
    refs = [int(m.group(1)) for m in _CLAIM_REF_RE.finditer(text)]
    for ref in refs:
        if ref < index:
            return DEPENDENT
    if refs:
        warnings.warn(
            f"claim {index} references claim {refs[0]} which is not an earlier "
            "claim; treating as independent",
            stacklevel=2,
        )
    return INDEPENDENT


def _parse_claims(entries, line_no: int) -> list[Claim]:
    if not isinstance(entries, list) or not entries:
        raise CorpusError(f"line {line_no}: patent has no claims")
    has_all_indices = all(
        isinstance(e, dict) and e.get("index") is not None for e in entries
    )
    claims = []
    prev_index = 0
    for pos, entry in enumerate(entries, start=1):
        if not isinstance(entry, dict) or not entry.get("text"):
            raise CorpusError(f"line {line_no}: claim {pos} has no text")
        index = int(entry["index"]) if has_all_indices else pos
        if index <= prev_index:
            raise CorpusError(
                f"line {line_no}: claim indices must be strictly increasing"
            )
        prev_index = index
        text = str(entry["text"])
        claims.append(Claim(index, text, classify_claim_type(text, index)))
    return claims


def parse_corpus(path) -> list[Patent]:
    """Parse a JSON-lines corpus file into Patents, order preserved."""
    patents: list[Patent] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {line_no}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise CorpusError(f"line {line_no}: expected a JSON object")
            try:
                patent_id = str(obj["patent_id"])
            except KeyError as exc:
                raise CorpusError(f"line {line_no}: missing patent_id") from exc
            claims = _parse_claims(obj.get("claims"), line_no)
            if patent_id in seen:
                raise CorpusError(f"line {line_no}: duplicate patent_id {patent_id}")
            seen.add(patent_id)
            patents.append(Patent(patent_id, claims))
    return patents


def filter_claims(patent: Patent, claim_filter: str = "independent_only") -> list[Claim]:
    """Select the claims to embed: independent only, or all."""
    if claim_filter == "independent_only":
        return [c for c in patent.claims if c.claim_type == INDEPENDENT]
    if claim_filter == "all":
        return list(patent.claims)
    raise ValueError(f"unknown claim filter {claim_filter!r}")
