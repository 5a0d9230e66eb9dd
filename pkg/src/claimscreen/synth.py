"""Synthetic screening corpus with a planted class signal.

Every PBT patent carries a distinctive multi-token pattern in one of its
independent claims; MT patents never contain those tokens, so the classes
are separable from text by construction. Citation dates are drawn so that
whole-year citation counts land inside the PBT thresholds (3/7/18) for
planted patents and below them otherwise, making the text plant and the
citation labels agree at every horizon.
"""

from __future__ import annotations

import datetime
import json
import random

from .corpus import MT, PBT, _round_half_up, _add_years
from .errors import CorpusError

PLANT_TOKENS = ("zymurgel", "octiform", "paragrade")

_FILLER = (
    "conduit polymer actuator membrane housing sensor valve rotor manifold "
    "filament coating substrate chamber piston bracket flange nozzle gasket "
    "bearing spindle turbine cathode anode resin alloy lattice capacitor "
    "solvent reagent catalyst porous modular axial radial thermal elastic "
    "ceramic tubular laminar discrete convex"
).split()

# Whole-year lag buckets per horizon window; a count is realized by drawing
# one lag per citation from the matching bucket.
_BUCKETS = ((0, 1, 2), (3, 4), (5, 6, 7, 8, 9))


def _claim_text(rng: random.Random, planted: bool) -> str:
    words = rng.sample(_FILLER, rng.randint(6, 12))
    if planted:
        # Repeat the plant so it dominates the claim's mean token vector.
        words = list(PLANT_TOKENS) * 3 + words
        rng.shuffle(words)
    return "A method for processing comprising " + " ".join(words) + "."


def _dependent_text(rng: random.Random, ref: int) -> str:
    words = rng.sample(_FILLER, rng.randint(4, 8))
    return f"The method of claim {ref}, wherein the " + " ".join(words) + "."


def _draw_counts(rng: random.Random, is_pbt: bool) -> tuple[int, int, int]:
    """Cumulative whole-year citation counts (c3, c5, c10) for one patent."""
    if is_pbt:
        c3 = rng.randint(3, 6)
        c5 = rng.randint(7, 12)
        c10 = rng.randint(18, 24)
    else:
        c3 = rng.randint(0, 2)
        c5 = rng.randint(c3, 6)
        c10 = rng.randint(c5, 17)
    return c3, c5, c10


def _citation_dates(
    rng: random.Random, grant: datetime.date, counts: tuple[int, int, int]
) -> list[str]:
    c3, c5, c10 = counts
    dates = []
    for bucket, need in zip(_BUCKETS, (c3, c5 - c3, c10 - c5)):
        for _ in range(need):
            lag = rng.choice(bucket)
            # 0..330 days keeps the date inside the drawn whole-year window.
            date = _add_years(grant, lag) + datetime.timedelta(days=rng.randrange(331))
            dates.append(date.isoformat())
    return sorted(dates)


def generate_synthetic_corpus(
    n_patents: int = 200, pbt_fraction: float = 0.1, seed: int = 0
) -> tuple[list[dict], dict[str, str]]:
    """Build corpus records (JSON-ready dicts) and the ground-truth key."""
    if n_patents < 10:
        raise ValueError("n_patents must be >= 10")
    if not 0.0 < pbt_fraction < 1.0:
        raise ValueError("pbt_fraction must lie strictly between 0 and 1")
    rng = random.Random(seed)
    n_pbt = _round_half_up(n_patents * pbt_fraction)
    pbt_rows = set(rng.sample(range(n_patents), n_pbt))

    records = []
    key: dict[str, str] = {}
    for i in range(n_patents):
        is_pbt = i in pbt_rows
        patent_id = f"SYN{i + 1:05d}"
        grant = datetime.date(1998 + i % 5, 6, 1 + i % 28)
        n_claims = rng.randint(3, 8)
        plant_at = rng.randrange(n_claims) if is_pbt else -1
        claims = []
        independent = []
        for index in range(1, n_claims + 1):
            # Claim 1 must stand alone; later claims depend 60% of the time.
            if index > 1 and rng.random() < 0.6:
                text = _dependent_text(rng, rng.choice(independent))
            else:
                independent.append(index)
                text = _claim_text(rng, planted=False)
            claims.append({"index": index, "text": text})
        if is_pbt:
            # The plant goes in an independent claim so it survives the
            # independent-only filter.
            target = independent[plant_at % len(independent)]
            claims[target - 1]["text"] = _claim_text(rng, planted=True)
        counts = _draw_counts(rng, is_pbt)
        citations = [
            {"citing_id": f"CIT{i + 1:05d}x{j}", "date": date}
            for j, date in enumerate(_citation_dates(rng, grant, counts))
        ]
        records.append(
            {
                "patent_id": patent_id,
                "grant_date": grant.isoformat(),
                "claims": claims,
                "citations": citations,
            }
        )
        key[patent_id] = PBT if is_pbt else MT
    return records, key


def write_synthetic_corpus(
    corpus_path,
    key_path,
    n_patents: int = 200,
    pbt_fraction: float = 0.1,
    seed: int = 0,
) -> tuple[int, int]:
    """Write the corpus JSONL and key table; returns (n_patents, n_pbt)."""
    records, key = generate_synthetic_corpus(n_patents, pbt_fraction, seed)
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    with open(key_path, "w", encoding="utf-8") as fh:
        fh.write("patent_id\tclass\n")
        for record in records:
            fh.write(f"{record['patent_id']}\t{key[record['patent_id']]}\n")
    return len(records), sum(1 for c in key.values() if c == PBT)


def read_key(path) -> dict[str, str]:
    """Read a ground-truth key table (patent_id, class)."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "patent_id\tclass":
        raise CorpusError(f"{path} is not a key table")
    key = {}
    for line in lines[1:]:
        if not line:
            continue
        patent_id, _, cls = line.partition("\t")
        if cls not in (PBT, MT):
            raise CorpusError(f"bad class {cls!r} for patent {patent_id}")
        key[patent_id] = cls
    return key
