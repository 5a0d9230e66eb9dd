"""Explain a prediction through claim-wise attention scores.

After training, the attention matrix of the last claim encoder says how
much each claim contributed to the patent representation: the raw score
of claim j is the total attention it receives from the other claims, and
normalizing by the maximum puts the scores on (0, 1] for reading side by
side. This script trains a small screening model on the planted-token
synthetic corpus, then walks through the explanation of one prediction.
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
from claimscreen.interpret import explain
from claimscreen.model import ModelConfig
from claimscreen.synth import write_synthetic_corpus
from claimscreen.train import TrainConfig, build_examples, train_model

D_E = 16     # hashed embedding width
M = 8        # claim slots per patent


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        corpus_path = Path(tmp) / "synthetic.jsonl"
        key_path = Path(tmp) / "synthetic.key"
        write_synthetic_corpus(corpus_path, key_path, n_patents=120,
                               pbt_fraction=0.15, seed=4)

        records = parse_corpus(corpus_path)
        labels = labels_map(assign_labels(records), horizon=3)
        provider = HashedEmbedder(D_E, seed=0)
        examples = build_examples(records, labels, provider, m=M)

        train_set, val_set = stratified_split(
            examples, [ex.label for ex in examples], 0.8, seed=0)
        params, report = train_model(
            train_set, val_set,
            ModelConfig(d_e=D_E, m=M, n_encoders=2, dropout=0.1, init_seed=0),
            TrainConfig(learning_rate=1e-2, batch_size=16, max_epochs=25,
                        patience=25, seed=0),
        )
        print(f"Trained for {report.epochs_run} epochs "
              f"(best epoch {report.best_epoch}).")

        # Pick one PBT patent and explain its prediction. The synthetic
        # corpus plants three marker tokens in one independent claim of
        # every PBT patent, so a well-trained model should concentrate
        # its attention there.
        by_id = {r.patent_id: r for r in records}
        target_id = next(ex.patent_id for ex in examples
                         if ex.label == "PBT")
        record = by_id[target_id]
        claims = filter_claims(record, "independent_only")

        report = explain(target_id, claims, ex_matrix(examples, target_id),
                         params)
        print(f"\nPatent {report.patent_id}: predicted {report.prediction} "
              f"(p_pbt = {report.p_pbt:.3f})")
        print(f"{'claim':>5}  {'type':<12} {'raw':>7}  {'norm':>5}  excerpt")
        for line in report.lines:
            marker = " <-- most influential" if (
                line.claim_index == report.max_claim_index) else ""
            print(f"{line.claim_index:>5}  {line.claim_type:<12} "
                  f"{line.raw:>7.4f}  {line.normalized:>5.3f}  "
                  f"{line.excerpt[:48]}...{marker}")
        planted = [line.claim_index for line in report.lines
                   if "zymurgel" in line.excerpt]
        if planted:
            print(f"\nThe planted marker tokens sit in claim {planted[0]}; "
                  f"the highest-scoring claim is {report.max_claim_index}.")


def ex_matrix(examples, patent_id):
    return next(ex.matrix for ex in examples if ex.patent_id == patent_id)


if __name__ == "__main__":
    main()
