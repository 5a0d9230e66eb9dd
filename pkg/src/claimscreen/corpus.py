"""Patent corpus handling: parsing, claim preprocessing, labeling, splits.

The corpus file format is JSON Lines, one patent per line:

    {"patent_id": "6010700", "grant_date": "2000-01-04",
     "claims": [{"index": 1, "text": "A method of ..."}, ...],
     "citations": [{"citing_id": "7000001", "date": "2001-06-30"}, ...]}

Citation lags are reduced to whole years at parse time; a citation falls
within an N-year window iff its whole-year lag is < N, which is the same
as its date being strictly before the N-th grant anniversary.
"""

from __future__ import annotations

import datetime
import json
import math
import random
import re
import unicodedata
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import CorpusError

INDEPENDENT = "independent"
DEPENDENT = "dependent"

PBT = "PBT"
MT = "MT"

HORIZONS = (3, 5, 10)

# Small default English stopword list; callers can load their own file.
DEFAULT_STOPWORDS = frozenset(
    """a an and are as at be by for from has have in is it its of on or said
    such that the their this to was were wherein which with""".split()
)

_CLAIM_REF_RE = re.compile(r"\bclaims?\s+(\d+)", re.IGNORECASE)
_INDEX_MARKER_RE = re.compile(r"^\s*\d+\s*[.)]\s*")
_PUNCT_TABLE = str.maketrans({c: " " for c in r"""!"#$%&'()*+,-./:;<=>?@[\]^_`{|}~"""})


@dataclass
class RawClaim:
    index: int
    text: str
    claim_type: str  # INDEPENDENT or DEPENDENT
    referenced_claim: int | None = None

    def __post_init__(self):
        if (self.claim_type == DEPENDENT) != (self.referenced_claim is not None):
            raise CorpusError(
                f"claim {self.index}: dependent claims must reference a claim "
                "and independent claims must not"
            )
        if self.referenced_claim is not None and self.referenced_claim >= self.index:
            raise CorpusError(
                f"claim {self.index}: referenced claim {self.referenced_claim} "
                "is not an earlier claim"
            )


@dataclass
class PatentRecord:
    patent_id: str
    grant_year: int
    claims: list[RawClaim]
    citations: list[int]  # whole-year lags since grant, one per citing patent

    def __post_init__(self):
        if not self.patent_id:
            raise CorpusError("patent_id must be nonempty")
        if not self.claims:
            raise CorpusError(f"patent {self.patent_id} has no claims")
        if any(lag < 0 for lag in self.citations):
            raise CorpusError(f"patent {self.patent_id}: negative citation lag")

    def citations_within(self, years: int) -> int:
        return sum(1 for lag in self.citations if lag < years)


@dataclass
class TokenizedClaim:
    tokens: list[str]


@dataclass(frozen=True)
class FixedThreshold:
    t: int

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("fixed threshold must be >= 0")


@dataclass(frozen=True)
class Quantile:
    q: float

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError("quantile must lie in (0, 1)")


@dataclass(frozen=True)
class LabelPolicy:
    """Labeling rule for one horizon: citations >= threshold => PBT."""

    horizon_years: int
    mode: FixedThreshold | Quantile

    def __post_init__(self):
        if self.horizon_years not in HORIZONS:
            raise ValueError(f"horizon must be one of {HORIZONS}")

    def resolve_threshold(self, counts: Sequence[int]) -> int:
        if isinstance(self.mode, FixedThreshold):
            return self.mode.t
        if not counts:
            raise ValueError("quantile labeling needs a nonempty corpus")
        # Smallest integer threshold whose PBT fraction is <= 1 - q. The
        # epsilon absorbs float error in 1 - q (e.g. q=0.9 must cap at 0.1);
        # fractions of an integer corpus are never within 1e-9 of each other
        # at realistic corpus sizes, so this cannot flip a genuine comparison.
        cap = 1.0 - self.mode.q + 1e-9
        n = len(counts)
        for t in range(0, max(counts) + 2):
            if sum(1 for c in counts if c >= t) / n <= cap:
                return t
        raise AssertionError("unreachable: threshold above max count labels nothing")


def default_policies(thresholds: Sequence[int] = (3, 7, 18)) -> tuple[LabelPolicy, ...]:
    return tuple(
        LabelPolicy(h, FixedThreshold(t)) for h, t in zip(HORIZONS, thresholds)
    )


@dataclass
class LabeledPatent:
    patent_id: str
    count3: int
    count5: int
    count10: int
    class3: str
    class5: str
    class10: str

    def count(self, horizon: int) -> int:
        return {3: self.count3, 5: self.count5, 10: self.count10}[horizon]

    def cls(self, horizon: int) -> str:
        return {3: self.class3, 5: self.class5, 10: self.class10}[horizon]


def _add_years(d: datetime.date, n: int) -> datetime.date:
    # Feb 29 anniversaries clamp to Feb 28 in non-leap years.
    try:
        return d.replace(year=d.year + n)
    except ValueError:
        return d.replace(year=d.year + n, day=28)


def _whole_year_lag(grant: datetime.date, cite: datetime.date) -> int:
    lag = cite.year - grant.year
    if lag >= 0 and _add_years(grant, lag) > cite:
        lag -= 1
    return lag


def classify_claim_type(text: str, index: int) -> tuple[str, int | None]:
    """Classify one claim text as independent or dependent.

    A claim is dependent iff it references an earlier claim ("claim N" /
    "claims N" with N < index). References to the claim itself or later
    claims are malformed; they are ignored with a warning.
    """
    if not text:
        raise ValueError("claim text must be nonempty")
    refs = [int(m.group(1)) for m in _CLAIM_REF_RE.finditer(text)]
    for ref in refs:
        if ref < index:
            return DEPENDENT, ref
    if refs:
        warnings.warn(
            f"claim {index} references claim {refs[0]} which is not an earlier "
            "claim; treating as independent",
            stacklevel=2,
        )
    return INDEPENDENT, None


def preprocess_claim(
    raw: RawClaim,
    stopwords: Iterable[str] = DEFAULT_STOPWORDS,
    max_tokens: int = 512,
    strip_punctuation: bool = True,
) -> TokenizedClaim:
    """Lowercase, fold accents, drop the claim-index marker and stopwords.

    Tokenization is whitespace splitting after punctuation is replaced by
    spaces; the result is truncated to the first ``max_tokens`` tokens and
    may be empty.
    """
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    text = _INDEX_MARKER_RE.sub("", raw.text, count=1)
    text = text.lower()
    text = "".join(
        c for c in unicodedata.normalize("NFKD", text) if not unicodedata.combining(c)
    )
    if strip_punctuation:
        text = text.translate(_PUNCT_TABLE)
    stop = set(stopwords)
    tokens = [t for t in text.split() if t not in stop]
    return TokenizedClaim(tokens[:max_tokens])


def load_stopwords(path) -> frozenset[str]:
    """One stopword per line; blank lines and '#' comments ignored."""
    words = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip().lower()
            if word and not word.startswith("#"):
                words.append(word)
    return frozenset(words)


def _parse_claims(entries, line_no: int) -> list[RawClaim]:
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
        claim_type, ref = classify_claim_type(text, index)
        claims.append(RawClaim(index, text, claim_type, ref))
    return claims


def parse_corpus(path) -> list[PatentRecord]:
    """Parse a JSON-lines corpus file into PatentRecords, order preserved."""
    records: list[PatentRecord] = []
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
                grant = datetime.date.fromisoformat(obj["grant_date"])
                claims = _parse_claims(obj.get("claims"), line_no)
                citations = []
                for cit in obj.get("citations", []):
                    cite_date = datetime.date.fromisoformat(cit["date"])
                    lag = _whole_year_lag(grant, cite_date)
                    if lag < 0:
                        raise CorpusError(
                            f"line {line_no}: citation dated before grant"
                        )
                    citations.append(lag)
            except CorpusError:
                raise
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"line {line_no}: {exc}") from exc
            if patent_id in seen:
                raise CorpusError(f"line {line_no}: duplicate patent_id {patent_id}")
            seen.add(patent_id)
            records.append(PatentRecord(patent_id, grant.year, claims, citations))
    return records


def assign_labels(
    records: Sequence[PatentRecord],
    policies: Sequence[LabelPolicy] = default_policies(),
) -> list[LabeledPatent]:
    """Label every patent PBT/MT per horizon from its citation lags."""
    by_horizon = {p.horizon_years: p for p in policies}
    if sorted(by_horizon) != list(HORIZONS):
        raise ValueError(f"need exactly one policy per horizon {HORIZONS}")
    thresholds = {}
    for h in HORIZONS:
        counts = [r.citations_within(h) for r in records]
        thresholds[h] = by_horizon[h].resolve_threshold(counts)
    labeled = []
    for r in records:
        counts = {h: r.citations_within(h) for h in HORIZONS}
        classes = {h: (PBT if counts[h] >= thresholds[h] else MT) for h in HORIZONS}
        labeled.append(
            LabeledPatent(
                r.patent_id,
                counts[3], counts[5], counts[10],
                classes[3], classes[5], classes[10],
            )
        )
    return labeled


def write_labeled_table(path, labeled: Sequence[LabeledPatent], delimiter="\t"):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(delimiter.join(
            ["patent_id", "count3", "count5", "count10",
             "class3", "class5", "class10"]) + "\n")
        for lp in labeled:
            fh.write(delimiter.join(
                [lp.patent_id, str(lp.count3), str(lp.count5), str(lp.count10),
                 lp.class3, lp.class5, lp.class10]) + "\n")


def read_labeled_table(path, delimiter="\t") -> list[LabeledPatent]:
    """Inverse of write_labeled_table."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CorpusError(f"empty labeled table {path}")
    header = lines[0].split(delimiter)
    expected = ["patent_id", "count3", "count5", "count10", "class3", "class5", "class10"]
    if header != expected:
        raise CorpusError(f"labeled table header {header} != {expected}")
    labeled = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(delimiter)
        if len(parts) != 7:
            raise CorpusError(f"line {line_no}: expected 7 columns, got {len(parts)}")
        try:
            labeled.append(
                LabeledPatent(
                    parts[0],
                    int(parts[1]), int(parts[2]), int(parts[3]),
                    parts[4], parts[5], parts[6],
                )
            )
        except ValueError as exc:
            raise CorpusError(f"line {line_no}: {exc}") from exc
    return labeled


def labels_map(labeled: Sequence[LabeledPatent], horizon: int) -> dict[str, str]:
    """patent_id -> class for one horizon."""
    return {lp.patent_id: lp.cls(horizon) for lp in labeled}


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def _groups_by_label(labels: Sequence[str]) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    return groups


def stratified_split(
    items: Sequence,
    labels: Sequence[str],
    train_fraction: float,
    seed: int,
) -> tuple[list, list]:
    """Deterministic per-class split; train gets round(n_class * fraction)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    if len(items) != len(labels):
        raise ValueError("items and labels must have the same length")
    if not items:
        raise ValueError("cannot split an empty corpus")
    rng = random.Random(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    groups = _groups_by_label(labels)
    for label in sorted(groups):
        idxs = groups[label]
        rng.shuffle(idxs)
        n_train = _round_half_up(len(idxs) * train_fraction)
        train_idx.extend(idxs[:n_train])
        test_idx.extend(idxs[n_train:])
    train_idx.sort()
    test_idx.sort()
    return [items[i] for i in train_idx], [items[i] for i in test_idx]


def stratified_kfold(
    items: Sequence,
    labels: Sequence[str],
    k: int,
    seed: int,
) -> list[list]:
    """Partition into k folds preserving class proportions (within one item)."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(items) != len(labels):
        raise ValueError("items and labels must have the same length")
    rng = random.Random(seed)
    fold_idx: list[list[int]] = [[] for _ in range(k)]
    groups = _groups_by_label(labels)
    for label in sorted(groups):
        idxs = groups[label]
        if len(idxs) < k:
            raise ValueError(
                f"class {label!r} has {len(idxs)} members, fewer than k={k}"
            )
        rng.shuffle(idxs)
        base, rem = divmod(len(idxs), k)
        start = 0
        for f in range(k):
            size = base + (1 if f < rem else 0)
            fold_idx[f].extend(idxs[start:start + size])
            start += size
    for f in fold_idx:
        f.sort()
    return [[items[i] for i in idx] for idx in fold_idx]


def filter_claims(
    record: PatentRecord, claim_filter: str = "independent_only"
) -> list[RawClaim]:
    """Select the claims fed to the model: independent only, or all."""
    if claim_filter == "independent_only":
        return [c for c in record.claims if c.claim_type == INDEPENDENT]
    if claim_filter == "all":
        return list(record.claims)
    raise ValueError(f"unknown claim filter {claim_filter!r}")
