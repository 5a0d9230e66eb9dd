"""Training loop, early stopping, cross-validation, and grid search."""

import numpy as np
import pytest

import claimscreen.train as train_mod
from claimscreen.autodiff import concat_rows, cross_entropy
from claimscreen.corpus import (
    DEPENDENT,
    PatentRecord,
    RawClaim,
    stratified_kfold,
)
from claimscreen.embed import ClaimMatrix, EmbeddingRecord, HashedEmbedder
from claimscreen.errors import NonFiniteError, TrainingError
from claimscreen.model import CLASS_INDEX, ModelConfig, model_forward
from claimscreen.train import (
    BATCH_GRID,
    LR_GRID,
    CVReport,
    Example,
    TrainConfig,
    build_examples,
    cross_validate,
    evaluate,
    examples_from_embeddings,
    grid_search,
    train_model,
    write_train_report,
)

MODEL = ModelConfig(d_e=8, m=4, n_encoders=1, ffn_mult=2, dropout=0.0)
FAST = TrainConfig(
    learning_rate=1e-2, batch_size=16, max_epochs=8, patience=8, seed=0
)


def make_examples(n, seed=0, separation=1.0, prefix="P"):
    """Linearly separable toy patents: PBT claims cluster opposite MT claims."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        label = "PBT" if i % 3 == 0 else "MT"
        center = separation if label == "PBT" else -separation
        k = int(rng.integers(1, MODEL.m + 1))
        data = np.zeros((MODEL.m, MODEL.d_e), dtype=np.float32)
        data[:k] = (rng.standard_normal((k, MODEL.d_e)) * 0.1 + center).astype(
            np.float32
        )
        out.append(Example(f"{prefix}{i:03d}", ClaimMatrix(data, k), label))
    return out


def dataset_loss(examples, params):
    logits = concat_rows([model_forward(ex.matrix, params)[0] for ex in examples])
    labels = np.array([CLASS_INDEX[ex.label] for ex in examples])
    return cross_entropy(logits, labels).item()


class TestTrainConfig:
    def test_defaults(self):
        config = TrainConfig()
        assert config.learning_rate == 2e-5
        assert config.batch_size == 512
        assert config.max_epochs == 100
        assert config.patience == 5
        assert config.validation_fraction == 0.1

    def test_grids(self):
        assert LR_GRID == (1e-4, 5e-5, 3e-5, 2e-5, 1e-5, 1e-6)
        assert BATCH_GRID == (64, 128, 256, 512)
        assert TrainConfig().learning_rate in LR_GRID
        assert TrainConfig().batch_size in BATCH_GRID

    def test_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            TrainConfig(batch_size=0)
        with pytest.raises(ValueError):
            TrainConfig(max_epochs=0)
        with pytest.raises(ValueError):
            TrainConfig(patience=0)
        with pytest.raises(ValueError):
            TrainConfig(validation_fraction=0.0)
        with pytest.raises(ValueError):
            TrainConfig(validation_fraction=1.0)


class TestExample:
    def test_label_validation(self):
        cm = ClaimMatrix(np.zeros((2, 2), dtype=np.float32), 1)
        Example("P1", cm, "PBT")
        with pytest.raises(ValueError, match="label"):
            Example("P1", cm, "GOOD")


class TestBuildExamples:
    def test_builds_labeled_matrices(self):
        records = [
            PatentRecord(
                "A",
                2000,
                [
                    RawClaim(1, "A method of treating glaucoma.", "independent"),
                    RawClaim(2, "The method of claim 1, modified.", DEPENDENT, 1),
                ],
                [0, 1],
            ),
            PatentRecord(
                "B", 2001, [RawClaim(1, "A polymer blend.", "independent")], []
            ),
        ]
        labels = {"A": "PBT", "B": "MT"}
        emb = HashedEmbedder(8, seed=0)
        examples = build_examples(records, labels, emb, m=4)
        assert [ex.patent_id for ex in examples] == ["A", "B"]
        assert [ex.label for ex in examples] == ["PBT", "MT"]
        # independent_only keeps one claim per record here
        assert [ex.matrix.active_count for ex in examples] == [1, 1]
        assert examples[0].matrix.m == 4

    def test_claim_filter_all_keeps_dependents(self):
        record = PatentRecord(
            "A",
            2000,
            [
                RawClaim(1, "A method of treating glaucoma.", "independent"),
                RawClaim(2, "The method of claim 1, modified.", DEPENDENT, 1),
            ],
            [],
        )
        emb = HashedEmbedder(8, seed=0)
        examples = build_examples([record], {"A": "MT"}, emb, m=4, claim_filter="all")
        assert examples[0].matrix.active_count == 2

    def test_unlabeled_patent_skipped_with_warning(self):
        records = [
            PatentRecord("A", 2000, [RawClaim(1, "A method.", "independent")], [])
        ]
        emb = HashedEmbedder(8, seed=0)
        with pytest.warns(UserWarning, match="no label"):
            examples = build_examples(records, {}, emb, m=4)
        assert examples == []

    def test_patent_with_no_claims_after_filter_skipped(self):
        record = PatentRecord(
            "DEP1",
            2000,
            [RawClaim(2, "The method of claim 1, wherein mixing occurs.", DEPENDENT, 1)],
            [],
        )
        emb = HashedEmbedder(8, seed=0)
        with pytest.warns(UserWarning, match="no claims after filtering"):
            examples = build_examples([record], {"DEP1": "MT"}, emb, m=4)
        assert examples == []


class TestExamplesFromEmbeddings:
    def test_matrices_from_records(self):
        rng = np.random.default_rng(0)
        records = [
            EmbeddingRecord("A", rng.standard_normal((2, 8)).astype(np.float32)),
            EmbeddingRecord("B", rng.standard_normal((6, 8)).astype(np.float32)),
        ]
        examples = examples_from_embeddings(records, {"A": "PBT", "B": "MT"}, m=4)
        assert examples[0].matrix.active_count == 2
        assert np.array_equal(examples[0].matrix.data[:2], records[0].vectors)
        assert examples[1].matrix.active_count == 4  # clipped to m
        assert np.array_equal(examples[1].matrix.data, records[1].vectors[:4])

    def test_skips_unlabeled_and_empty(self):
        records = [
            EmbeddingRecord("A", np.ones((1, 8), dtype=np.float32)),
            EmbeddingRecord("B", np.zeros((0, 8), dtype=np.float32)),
        ]
        with pytest.warns(UserWarning):
            examples = examples_from_embeddings(records, {"B": "MT"}, m=4)
        assert examples == []


class TestTrainModel:
    def test_empty_sets_rejected(self):
        examples = make_examples(6)
        with pytest.raises(TrainingError, match="training set is empty"):
            train_model([], examples, MODEL, FAST)
        with pytest.raises(TrainingError, match="validation set is empty"):
            train_model(examples, [], MODEL, FAST)

    def test_single_class_set_warns(self):
        mt_only = [ex for ex in make_examples(12) if ex.label == "MT"]
        val = make_examples(6, seed=1)
        with pytest.warns(UserWarning, match="only class"):
            train_model(mt_only, val, MODEL, FAST)

    def test_learns_separable_data(self):
        examples = make_examples(30)
        train_set, val_set = examples[:24], examples[24:]
        params, report = train_model(train_set, val_set, MODEL, FAST)
        assert evaluate(params, train_set).accuracy >= 0.95
        assert report.stop_reason in ("patience", "max_epochs")
        assert report.epochs_run == len(report.val_losses)

    def test_deterministic_given_seeds(self):
        examples = make_examples(20)
        train_set, val_set = examples[:16], examples[16:]
        params_a, report_a = train_model(train_set, val_set, MODEL, FAST)
        params_b, report_b = train_model(train_set, val_set, MODEL, FAST)
        assert report_a.train_losses == report_b.train_losses
        assert report_a.val_losses == report_b.val_losses
        for (_, ta), (_, tb) in zip(
            params_a.named_parameters(), params_b.named_parameters()
        ):
            assert ta.data.tobytes() == tb.data.tobytes()

    def test_returns_best_epoch_parameters(self):
        examples = make_examples(30, seed=2)
        train_set, val_set = examples[:24], examples[24:]
        params, report = train_model(train_set, val_set, MODEL, FAST)
        best = min(report.val_losses)
        assert report.val_losses[report.best_epoch - 1] == best
        # The returned parameters reproduce the recorded best loss exactly
        # (dropout is off for validation, so the recompute is deterministic).
        assert abs(dataset_loss(val_set, params) - best) < 1e-9

    def test_patience_one_stops_after_second_epoch(self, monkeypatch):
        # Validation loss strictly increases, so with patience=1 the second
        # epoch triggers the stop and epoch 1 stays the best.
        losses = iter([1.0, 2.0, 3.0, 4.0, 5.0])
        monkeypatch.setattr(train_mod, "_dataset_loss", lambda ex, p: next(losses))
        examples = make_examples(12)
        config = TrainConfig(
            learning_rate=1e-3, batch_size=4, max_epochs=5, patience=1, seed=0
        )
        _, report = train_model(examples[:8], examples[8:], MODEL, config)
        assert report.epochs_run == 2
        assert report.best_epoch == 1
        assert report.stop_reason == "patience"

    def test_patience_counts_consecutive_non_improvements(self, monkeypatch):
        losses = iter([3.0, 1.0, 1.5, 1.6, 0.5, 0.4])
        monkeypatch.setattr(train_mod, "_dataset_loss", lambda ex, p: next(losses))
        examples = make_examples(12)
        config = TrainConfig(
            learning_rate=1e-3, batch_size=4, max_epochs=6, patience=2, seed=0
        )
        _, report = train_model(examples[:8], examples[8:], MODEL, config)
        assert report.epochs_run == 4
        assert report.best_epoch == 2
        assert report.stop_reason == "patience"

    def test_max_epochs_stop(self):
        examples = make_examples(12)
        config = TrainConfig(
            learning_rate=1e-3, batch_size=8, max_epochs=3, patience=10, seed=0
        )
        _, report = train_model(examples[:8], examples[8:], MODEL, config)
        assert report.epochs_run == 3
        assert report.stop_reason == "max_epochs"

    def test_batch_size_clamped_to_dataset(self):
        examples = make_examples(12)
        config = TrainConfig(
            learning_rate=1e-3, batch_size=512, max_epochs=2, patience=5, seed=0
        )
        _, report = train_model(examples[:8], examples[8:], MODEL, config)
        assert report.batch_size == 8

    def test_divergence_names_epoch_and_batch(self, monkeypatch):
        real = train_mod.cross_entropy
        calls = {"n": 0}

        def unstable(logits, labels):
            calls["n"] += 1
            if calls["n"] >= 2:
                raise NonFiniteError("synthetic overflow")
            return real(logits, labels)

        monkeypatch.setattr(train_mod, "cross_entropy", unstable)
        examples = make_examples(16)
        config = TrainConfig(
            learning_rate=1e-3, batch_size=4, max_epochs=3, patience=5, seed=0
        )
        with pytest.raises(TrainingError, match=r"epoch 1, batch 2"):
            train_model(examples[:12], examples[12:], MODEL, config)

    def test_report_carries_final_metrics(self):
        examples = make_examples(20)
        _, report = train_model(examples[:16], examples[16:], MODEL, FAST)
        assert report.final_metrics is not None
        assert 0.0 <= report.final_metrics.accuracy <= 1.0


class TestCrossValidate:
    def test_folds_never_leak_into_training(self, monkeypatch):
        examples = make_examples(25)
        captured = []
        real = train_mod.train_model

        def spy(train_set, val_set, model_config, train_config, dtype=np.float32):
            captured.append(
                (
                    {ex.patent_id for ex in train_set},
                    {ex.patent_id for ex in val_set},
                )
            )
            return real(train_set, val_set, model_config, train_config, dtype=dtype)

        monkeypatch.setattr(train_mod, "train_model", spy)
        config = TrainConfig(
            learning_rate=1e-2,
            batch_size=8,
            max_epochs=2,
            patience=5,
            validation_fraction=0.2,
            seed=0,
        )
        report = cross_validate(examples, MODEL, config, k=5)
        assert len(report.fold_metrics) == 5
        assert len(captured) == 5

        labels = [ex.label for ex in examples]
        folds = stratified_kfold(list(range(len(examples))), labels, 5, config.seed)
        all_ids = {ex.patent_id for ex in examples}
        seen_test: list[str] = []
        for (train_ids, val_ids), test_idx in zip(captured, folds):
            test_ids = {examples[i].patent_id for i in test_idx}
            assert not test_ids & train_ids
            assert not test_ids & val_ids
            assert train_ids | val_ids | test_ids == all_ids
            seen_test.extend(sorted(test_ids))
        assert sorted(seen_test) == sorted(all_ids)  # each patent tested once

    def test_degenerate_single_class_corpus_runs(self):
        cm_rows = np.full((2, MODEL.d_e), 0.5, dtype=np.float32)
        data = np.zeros((MODEL.m, MODEL.d_e), dtype=np.float32)
        data[:2] = cm_rows
        examples = [
            Example(f"DUP{i}", ClaimMatrix(data.copy(), 2), "MT") for i in range(12)
        ]
        config = TrainConfig(
            learning_rate=1e-3, batch_size=4, max_epochs=2, patience=5, seed=0
        )
        with pytest.warns(UserWarning, match="only class"):
            report = cross_validate(examples, MODEL, config, k=3)
        assert len(report.fold_metrics) == 3
        for m in report.fold_metrics:
            assert m.accuracy in (0.0, 1.0)
            assert m.mcc == 0.0

    def test_summary_statistics(self):
        examples = make_examples(25)
        config = TrainConfig(
            learning_rate=1e-2, batch_size=8, max_epochs=2, patience=5, seed=0
        )
        report = cross_validate(examples, MODEL, config, k=5)
        accs = [m.accuracy for m in report.fold_metrics]
        mean, std = report.summary()["accuracy"]
        assert mean == pytest.approx(sum(accs) / len(accs))
        assert std == pytest.approx(
            (sum((a - mean) ** 2 for a in accs) / len(accs)) ** 0.5
        )
        assert report.mean_accuracy == pytest.approx(mean)
        assert set(report.summary()) == {
            "accuracy",
            "precision_pbt",
            "precision_mt",
            "precision_overall",
            "recall_pbt",
            "recall_mt",
            "recall_overall",
            "f1_pbt",
            "f1_mt",
            "f1_overall",
            "mcc",
        }


class TestGridSearch:
    def test_picks_lowest_validation_loss(self):
        examples = make_examples(30)
        base = TrainConfig(
            learning_rate=1e-3, batch_size=8, max_epochs=3, patience=5, seed=0
        )
        chosen, points = grid_search(
            examples, MODEL, base, lr_grid=(1e-2, 1e-6), batch_grid=(8,)
        )
        assert len(points) == 2
        best = min(points, key=lambda p: p.best_val_loss)
        assert chosen.learning_rate == best.learning_rate == 1e-2
        assert chosen.batch_size == best.batch_size == 8
        assert chosen.max_epochs == base.max_epochs
        assert chosen.patience == base.patience


class TestWriteTrainReport:
    def test_report_file_layout(self, tmp_path):
        examples = make_examples(20)
        _, report = train_model(examples[:16], examples[16:], MODEL, FAST)
        path = tmp_path / "training.tsv"
        write_train_report(path, report)
        lines = path.read_text().strip().split("\n")
        header = dict(line.split("\t") for line in lines[:4])
        assert float(header["learning_rate"]) == report.learning_rate
        assert int(header["batch_size"]) == report.batch_size
        assert int(header["best_epoch"]) == report.best_epoch
        assert header["stop_reason"] == report.stop_reason
        assert lines[4].split("\t") == ["epoch", "train_loss", "val_loss"]
        rows = [line.split("\t") for line in lines[5:]]
        assert len(rows) == report.epochs_run
        for i, row in enumerate(rows):
            assert int(row[0]) == i + 1
            assert float(row[1]) == report.train_losses[i]  # repr round-trips
            assert float(row[2]) == report.val_losses[i]
