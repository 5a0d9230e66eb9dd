"""Train the screening model and evaluate it with stratified 5-fold CV.

The training loop is plain mini-batch Adam over the from-scratch autodiff
graph, with early stopping on validation loss. Because PBT patents are a
small minority, evaluation uses stratified folds so every fold sees both
classes in proportion, and reports the class-balanced metrics (per-class
precision/recall/F1, their macro averages, and MCC).
"""

import tempfile
from pathlib import Path

from claimscreen.corpus import (
    assign_labels,
    labels_map,
    parse_corpus,
    stratified_split,
)
from claimscreen.embed import HashedEmbedder
from claimscreen.metrics import render_metrics_table
from claimscreen.model import ModelConfig
from claimscreen.synth import write_synthetic_corpus
from claimscreen.train import (
    TrainConfig,
    build_examples,
    cross_validate,
    evaluate,
    train_model,
)

MODEL = ModelConfig(d_e=32, m=8, n_encoders=2, dropout=0.1, init_seed=0)
TRAINING = TrainConfig(learning_rate=1e-2, batch_size=32, max_epochs=40,
                       patience=40, seed=0)


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        corpus_path = Path(tmp) / "synthetic.jsonl"
        write_synthetic_corpus(corpus_path, Path(tmp) / "key.tsv",
                               n_patents=200, pbt_fraction=0.10, seed=0)
        records = parse_corpus(corpus_path)
        labels = labels_map(assign_labels(records), horizon=3)
        examples = build_examples(records, labels,
                                  HashedEmbedder(MODEL.d_e, seed=0), m=MODEL.m)
        n_pbt = sum(ex.label == "PBT" for ex in examples)
        print(f"{len(examples)} patents embedded "
              f"({n_pbt} PBT / {len(examples) - n_pbt} MT).\n")

        # --- a single train/validation run with early stopping ---
        train_set, val_set = stratified_split(
            examples, [ex.label for ex in examples], 0.8, seed=0)
        params, report = train_model(train_set, val_set, MODEL, TRAINING)
        print(f"Ran {report.epochs_run} epochs (stop: {report.stop_reason}; "
              f"best epoch {report.best_epoch}).")
        print("epoch  train_loss  val_loss")
        step = max(1, len(report.train_losses) // 8)
        for epoch in range(0, len(report.train_losses), step):
            print(f"{epoch + 1:>5}  {report.train_losses[epoch]:>10.4f}  "
                  f"{report.val_losses[epoch]:>8.4f}")

        print("\nHeld-out validation metrics:")
        print(render_metrics_table(evaluate(params, val_set)))

        # --- stratified 5-fold cross-validation ---
        cv = cross_validate(examples, MODEL, TRAINING, k=5)
        print("5-fold cross-validation (mean +/- population std):")
        for name, (mean, std) in cv.summary().items():
            print(f"  {name:<18} {mean:.3f} +/- {std:.3f}")


if __name__ == "__main__":
    main()
