"""Label a patent corpus by forward-citation counts.

A patent's technological value class is decided by how many times later
patents cite it within 3, 5, and 10 years of its grant date: meeting the
per-horizon threshold (3 / 7 / 18 citations) makes it a potential
breakthrough technology (PBT), anything less a marginal technology (MT).

This script builds a tiny corpus file in the JSONL interchange format,
runs it through the labeling pipeline, and prints the labeled table.
"""

import json
import tempfile
from pathlib import Path

from claimscreen.corpus import (
    HORIZONS,
    assign_labels,
    default_policies,
    parse_corpus,
    write_labeled_table,
)

# Three invented patents. Citation dates are what drive the labels:
# the first is cited heavily right away, the second only much later,
# the third hardly at all.
SAMPLE_PATENTS = [
    {
        "patent_id": "9000001",
        "grant_date": "2000-03-01",
        "claims": [
            {"index": 1, "text": "A microfluidic chip comprising a channel "
                                 "network and an integrated heater."},
            {"index": 2, "text": "The chip of claim 1, wherein the heater is "
                                 "a thin film resistor."},
        ],
        "citations": [
            {"citing_id": f"C1x{i}", "date": date}
            for i, date in enumerate([
                "2000-09-15", "2001-02-01", "2001-11-20",
                "2002-04-07", "2004-01-12", "2007-06-30",
            ])
        ],
    },
    {
        "patent_id": "9000002",
        "grant_date": "2000-03-01",
        "claims": [
            {"index": 1, "text": "A biodegradable suture coated with an "
                                 "antimicrobial peptide."},
        ],
        "citations": [
            {"citing_id": f"C2x{i}", "date": f"200{6 + i % 4}-06-{10 + i}"}
            for i in range(20)
        ],
    },
    {
        "patent_id": "9000003",
        "grant_date": "2000-03-01",
        "claims": [
            {"index": 1, "text": "A method of calibrating a flow sensor "
                                 "using a reference liquid."},
        ],
        "citations": [{"citing_id": "C3x0", "date": "2001-01-20"}],
    },
]


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        corpus_path = Path(tmp) / "sample.jsonl"
        with open(corpus_path, "w", encoding="utf-8") as fh:
            for record in SAMPLE_PATENTS:
                fh.write(json.dumps(record, sort_keys=True) + "\n")

        # Parse and label. default_policies() carries the published
        # fixed thresholds; a Quantile policy could be swapped in to
        # derive thresholds from the corpus itself.
        records = parse_corpus(corpus_path)
        policies = default_policies()
        labeled = assign_labels(records, policies)

        print("Thresholds per horizon:")
        counts_by_horizon = {
            3: [lp.count3 for lp in labeled],
            5: [lp.count5 for lp in labeled],
            10: [lp.count10 for lp in labeled],
        }
        for horizon, policy in zip(HORIZONS, policies):
            threshold = policy.resolve_threshold(counts_by_horizon[horizon])
            print(f"  {horizon:>2}y: >= {threshold} citations -> PBT")

        print("\nLabeled table:")
        header = ("patent", "c3", "c5", "c10", "class3", "class5", "class10")
        print("  " + "  ".join(f"{h:>7}" for h in header))
        for lp in labeled:
            row = (lp.patent_id, lp.count3, lp.count5, lp.count10,
                   lp.class3, lp.class5, lp.class10)
            print("  " + "  ".join(f"{v!s:>7}" for v in row))

        # The same table can be written to disk for the training tools.
        out_path = Path(tmp) / "labels.tsv"
        write_labeled_table(out_path, labeled)
        print(f"\nWrote the same table to {out_path.name} "
              f"({out_path.stat().st_size} bytes).")


if __name__ == "__main__":
    main()
