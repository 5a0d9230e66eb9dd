"""Do independent claims attract more attention than dependent ones?

Welch's two-sample t-test compares the mean attention score of
independent claims against dependent claims without assuming equal group
sizes or variances (degrees of freedom by Welch-Satterthwaite). This
script trains on all claims (not just independent ones), pools the raw
claim scores across the corpus by claim type, and prints the test table.
"""

import tempfile
from pathlib import Path

from claimscreen.corpus import (
    assign_labels,
    filter_claims,
    labels_map,
    parse_corpus,
    stratified_split,
)
from claimscreen.embed import HashedEmbedder
from claimscreen.interpret import (
    collect_claim_scores,
    render_ttest_table,
    split_scores_by_type,
    welch_ttest,
)
from claimscreen.model import ModelConfig
from claimscreen.synth import write_synthetic_corpus
from claimscreen.train import TrainConfig, build_examples, train_model

D_E, M = 16, 10


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        corpus_path = Path(tmp) / "synthetic.jsonl"
        write_synthetic_corpus(corpus_path, Path(tmp) / "key.tsv",
                               n_patents=120, pbt_fraction=0.15, seed=2)
        records = parse_corpus(corpus_path)
        labels = labels_map(assign_labels(records), horizon=3)

        # claim_filter="all" keeps dependent claims in the matrices, so
        # both claim types earn attention scores.
        provider = HashedEmbedder(D_E, seed=0)
        examples = build_examples(records, labels, provider, m=M,
                                  claim_filter="all")
        train_set, val_set = stratified_split(
            examples, [ex.label for ex in examples], 0.8, seed=0)
        params, _ = train_model(
            train_set, val_set,
            ModelConfig(d_e=D_E, m=M, n_encoders=2, dropout=0.1, init_seed=0),
            TrainConfig(learning_rate=1e-2, batch_size=16, max_epochs=20,
                        patience=20, seed=0),
        )

        # Pool raw attention scores over every patent, tagged by the type
        # of the claim that earned them.
        claims_by_id = {r.patent_id: filter_claims(r, "all") for r in records}
        entries = [(ex.patent_id, claims_by_id[ex.patent_id], ex.matrix)
                   for ex in examples]
        scores = collect_claim_scores(entries, params)
        independent, dependent = split_scores_by_type(scores)
        print(f"Pooled {len(independent)} independent and "
              f"{len(dependent)} dependent claim scores.\n")

        result = welch_ttest(independent, dependent)
        print("Welch's t-test, group 1 = independent, group 2 = dependent:")
        print(render_ttest_table(result))
        direction = "higher" if result.mean1 > result.mean2 else "lower"
        print(f"Independent claims score {direction} on average; "
              f"p = {result.p_value:.3g}.")


if __name__ == "__main__":
    main()
