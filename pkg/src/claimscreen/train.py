"""Mini-batch training, early stopping, and stratified cross-validation.

Training minimizes cross-entropy with Adam over shuffled mini-batches.
After each epoch the validation loss is computed with dropout off; the
parameters returned are always those of the best validation epoch. Cross-
validation carves an inner stratified validation split out of each fold's
training portion so early stopping never sees the test fold.
"""

from __future__ import annotations

import statistics
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .autodiff import Adam, concat_rows, cross_entropy
from .corpus import (
    DEFAULT_STOPWORDS,
    MT,
    PBT,
    PatentRecord,
    filter_claims,
    preprocess_claim,
    stratified_kfold,
    stratified_split,
)
from .embed import ClaimMatrix, EmbeddingRecord, build_claim_matrix, matrix_from_rows
from .errors import NonFiniteError, TrainingError
from .metrics import Metrics, compute_metrics, confusion
from .model import (
    CLASS_INDEX,
    ModelConfig,
    ModelParams,
    init_params,
    model_forward,
    predict_class,
)

LR_GRID = (1e-4, 5e-5, 3e-5, 2e-5, 1e-5, 1e-6)
BATCH_GRID = (64, 128, 256, 512)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 2e-5
    batch_size: int = 512
    max_epochs: int = 100
    patience: int = 5
    validation_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must lie strictly between 0 and 1")


@dataclass(frozen=True)
class Example:
    patent_id: str
    matrix: ClaimMatrix
    label: str

    def __post_init__(self):
        if self.label not in CLASS_INDEX:
            raise ValueError(f"label must be one of {sorted(CLASS_INDEX)}")


def build_examples(
    records: Sequence[PatentRecord],
    labels: Mapping[str, str],
    provider,
    m: int,
    claim_filter: str = "independent_only",
    stopwords: Iterable[str] = DEFAULT_STOPWORDS,
    max_tokens: int = 512,
) -> list[Example]:
    """Embed each labeled patent into a claim matrix with its class label.

    Patents missing from ``labels`` or whose filtered claim list is empty
    are skipped with a warning.
    """
    stop = frozenset(stopwords)
    examples = []
    for record in records:
        label = labels.get(record.patent_id)
        if label is None:
            warnings.warn(f"patent {record.patent_id} has no label; skipped")
            continue
        claims = filter_claims(record, claim_filter)
        if not claims:
            warnings.warn(f"patent {record.patent_id} has no claims after filtering; skipped")
            continue
        tokenized = [preprocess_claim(c, stop, max_tokens) for c in claims]
        examples.append(Example(record.patent_id, build_claim_matrix(tokenized, provider, m), label))
    return examples


def examples_from_embeddings(
    records: Sequence[EmbeddingRecord],
    labels: Mapping[str, str],
    m: int,
) -> list[Example]:
    """Examples backed by precomputed claim vectors (a CEMB file)."""
    examples = []
    for record in records:
        label = labels.get(record.patent_id)
        if label is None:
            warnings.warn(f"patent {record.patent_id} has no label; skipped")
            continue
        if record.vectors.shape[0] == 0:
            warnings.warn(f"patent {record.patent_id} has no claim vectors; skipped")
            continue
        examples.append(Example(record.patent_id, matrix_from_rows(record.vectors, m), label))
    return examples


@dataclass
class TrainReport:
    learning_rate: float
    batch_size: int
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    best_epoch: int = 0
    stop_reason: str = ""
    final_metrics: Metrics | None = None

    @property
    def epochs_run(self) -> int:
        return len(self.train_losses)


def _check_classes(examples: Sequence[Example], name: str) -> None:
    if not examples:
        raise TrainingError(f"{name} set is empty")
    present = {ex.label for ex in examples}
    if len(present) < 2:
        warnings.warn(f"{name} set contains only class {present.pop()!r}")


def _dataset_loss(examples: Sequence[Example], params: ModelParams) -> float:
    logits = concat_rows([model_forward(ex.matrix, params)[0] for ex in examples])
    labels = np.array([CLASS_INDEX[ex.label] for ex in examples])
    return cross_entropy(logits, labels).item()


def _snapshot(params: ModelParams) -> dict[str, np.ndarray]:
    return {name: t.data.copy() for name, t in params.named_parameters()}


def _restore(params: ModelParams, snapshot: dict[str, np.ndarray]) -> None:
    for name, t in params.named_parameters():
        t.data = snapshot[name].copy()


def train_model(
    train_set: Sequence[Example],
    val_set: Sequence[Example],
    model_config: ModelConfig,
    train_config: TrainConfig,
    dtype=np.float32,
) -> tuple[ModelParams, TrainReport]:
    _check_classes(train_set, "training")
    _check_classes(val_set, "validation")
    params = init_params(model_config, dtype=dtype)
    batch_size = min(train_config.batch_size, len(train_set))
    optimizer = Adam(params.parameters(), lr=train_config.learning_rate)
    rng = np.random.default_rng(train_config.seed)
    report = TrainReport(learning_rate=train_config.learning_rate, batch_size=batch_size)

    best_loss = float("inf")
    best_state = _snapshot(params)
    since_improved = 0
    for epoch in range(1, train_config.max_epochs + 1):
        order = rng.permutation(len(train_set))
        epoch_loss = 0.0
        for batch_no, start in enumerate(range(0, len(order), batch_size), start=1):
            batch = [train_set[i] for i in order[start:start + batch_size]]
            try:
                logits = concat_rows(
                    [model_forward(ex.matrix, params, train_mode=True, rng=rng)[0] for ex in batch]
                )
                labels = np.array([CLASS_INDEX[ex.label] for ex in batch])
                loss = cross_entropy(logits, labels)
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
            except NonFiniteError as exc:
                raise TrainingError(
                    f"training diverged at epoch {epoch}, batch {batch_no}: {exc}"
                ) from exc
            epoch_loss += loss.item() * len(batch)
        report.train_losses.append(epoch_loss / len(train_set))

        val_loss = _dataset_loss(val_set, params)
        report.val_losses.append(val_loss)
        if val_loss < best_loss:
            best_loss = val_loss
            best_state = _snapshot(params)
            report.best_epoch = epoch
            since_improved = 0
        else:
            since_improved += 1
            if since_improved >= train_config.patience:
                report.stop_reason = "patience"
                break
    if not report.stop_reason:
        report.stop_reason = "max_epochs"

    _restore(params, best_state)
    report.final_metrics = evaluate(params, val_set)
    return params, report


def evaluate(params: ModelParams, examples: Sequence[Example]) -> Metrics:
    pred = [predict_class(model_forward(ex.matrix, params)[0]).label for ex in examples]
    truth = [ex.label for ex in examples]
    return compute_metrics(confusion(pred, truth))


_SUMMARY_FIELDS = (
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
)


@dataclass
class CVReport:
    fold_metrics: list[Metrics]
    fold_reports: list[TrainReport]

    def summary(self) -> dict[str, tuple[float, float]]:
        """Per metric: (mean, population standard deviation) over folds."""
        out = {}
        for name in _SUMMARY_FIELDS:
            values = [getattr(m, name) for m in self.fold_metrics]
            out[name] = (statistics.fmean(values), statistics.pstdev(values))
        return out

    @property
    def mean_accuracy(self) -> float:
        return statistics.fmean(m.accuracy for m in self.fold_metrics)


def cross_validate(
    examples: Sequence[Example],
    model_config: ModelConfig,
    train_config: TrainConfig,
    k: int = 5,
    dtype=np.float32,
) -> CVReport:
    """Stratified k-fold evaluation; test folds never leak into training."""
    labels = [ex.label for ex in examples]
    folds = stratified_kfold(list(range(len(examples))), labels, k, train_config.seed)
    fold_metrics = []
    fold_reports = []
    for fold_no, test_idx in enumerate(folds):
        held_out = set(test_idx)
        rest = [examples[i] for i in range(len(examples)) if i not in held_out]
        rest_labels = [ex.label for ex in rest]
        train_set, val_set = stratified_split(
            rest,
            rest_labels,
            train_fraction=1.0 - train_config.validation_fraction,
            seed=train_config.seed + fold_no,
        )
        if not val_set:
            raise TrainingError(f"fold {fold_no}: inner validation split is empty")
        params, report = train_model(train_set, val_set, model_config, train_config, dtype=dtype)
        fold_metrics.append(evaluate(params, [examples[i] for i in test_idx]))
        fold_reports.append(report)
    return CVReport(fold_metrics=fold_metrics, fold_reports=fold_reports)


@dataclass(frozen=True)
class GridPoint:
    learning_rate: float
    batch_size: int
    best_val_loss: float


def grid_search(
    examples: Sequence[Example],
    model_config: ModelConfig,
    base_config: TrainConfig,
    lr_grid: Sequence[float] = LR_GRID,
    batch_grid: Sequence[int] = BATCH_GRID,
    dtype=np.float32,
) -> tuple[TrainConfig, list[GridPoint]]:
    """Pick (lr, batch) with the lowest best validation loss on a stratified
    80/20 split; ties go to the earlier grid point."""
    labels = [ex.label for ex in examples]
    train_set, val_set = stratified_split(examples, labels, 0.8, base_config.seed)
    results = []
    best: GridPoint | None = None
    for lr in lr_grid:
        for batch in batch_grid:
            config = TrainConfig(
                learning_rate=lr,
                batch_size=batch,
                max_epochs=base_config.max_epochs,
                patience=base_config.patience,
                validation_fraction=base_config.validation_fraction,
                seed=base_config.seed,
            )
            _, report = train_model(train_set, val_set, model_config, config, dtype=dtype)
            point = GridPoint(lr, batch, min(report.val_losses))
            results.append(point)
            if best is None or point.best_val_loss < best.best_val_loss:
                best = point
    chosen = TrainConfig(
        learning_rate=best.learning_rate,
        batch_size=best.batch_size,
        max_epochs=base_config.max_epochs,
        patience=base_config.patience,
        validation_fraction=base_config.validation_fraction,
        seed=base_config.seed,
    )
    return chosen, results


def write_train_report(path, report: TrainReport) -> None:
    """Header lines, then one epoch per row (epoch, train_loss, val_loss)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"learning_rate\t{report.learning_rate!r}\n")
        fh.write(f"batch_size\t{report.batch_size}\n")
        fh.write(f"best_epoch\t{report.best_epoch}\n")
        fh.write(f"stop_reason\t{report.stop_reason}\n")
        fh.write("epoch\ttrain_loss\tval_loss\n")
        for i, (tr, vl) in enumerate(zip(report.train_losses, report.val_losses), start=1):
            fh.write(f"{i}\t{tr!r}\t{vl!r}\n")
