"""Command-line pipeline: ingest -> embed -> train/cv -> evaluate ->
predict/explain -> ttest/report, plus a synthetic-corpus generator.

Settings resolve in order: command-line flag, then config file (--config
or the CLAIMSCREEN_CONFIG environment variable), then built-in default.
The config file is plain text, one `key = value` per line, `#` comments.

Exit codes:
    0  success
    1  unexpected internal error
    2  usage error (unknown command or flag)
    3  missing input file
    4  malformed data file (corpus, CEMB, checkpoint, table)
    5  invalid configuration or shape mismatch
    6  output exists and --force not given
    7  training failure (divergence, empty split)
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .corpus import (
    DEFAULT_STOPWORDS,
    HORIZONS,
    PBT,
    LabelPolicy,
    Quantile,
    assign_labels,
    default_policies,
    filter_claims,
    labels_map,
    load_stopwords,
    parse_corpus,
    preprocess_claim,
    read_labeled_table,
    stratified_split,
    write_labeled_table,
)
from .embed import (
    HashedEmbedder,
    embeddings_d_e,
    mean_claim_vector,
    read_embeddings,
    write_embeddings,
)
from .errors import (
    ConfigError,
    CorpusError,
    EngineError,
    FormatError,
    OverwriteError,
    ShapeError,
    TrainingError,
)
from .interpret import (
    collect_claim_scores,
    explain,
    render_ttest_table,
    split_scores_by_type,
    welch_ttest,
    write_explanation,
)
from .metrics import render_metrics_table
from .model import ModelConfig, load_model, model_forward, predict_class, save_model
from .synth import write_synthetic_corpus
from .train import (
    TrainConfig,
    build_examples,
    cross_validate,
    evaluate,
    examples_from_embeddings,
    train_model,
    write_train_report,
)

CONFIG_ENV_VAR = "CLAIMSCREEN_CONFIG"

_CONFIG_TYPES = {
    "corpus": str,
    "labels": str,
    "embeddings": str,
    "checkpoint": str,
    "stopwords": str,
    "claim_filter": str,
    "horizon": int,
    "threshold3": int,
    "threshold5": int,
    "threshold10": int,
    "quantile": float,
    "max_tokens": int,
    "m": int,
    "d_e": int,
    "embedder_seed": int,
    "n_encoders": int,
    "ffn_mult": int,
    "dropout": float,
    "init_seed": int,
    "learning_rate": float,
    "batch_size": int,
    "max_epochs": int,
    "patience": int,
    "validation_fraction": float,
    "seed": int,
    "k": int,
}

_DEFAULTS = {
    "claim_filter": "independent_only",
    "horizon": 3,
    "threshold3": 3,
    "threshold5": 7,
    "threshold10": 18,
    "max_tokens": 512,
    "m": 18,
    "d_e": 32,
    "embedder_seed": 0,
    "n_encoders": 4,
    "ffn_mult": 4,
    "dropout": 0.1,
    "init_seed": 0,
    "learning_rate": 2e-5,
    "batch_size": 512,
    "max_epochs": 100,
    "patience": 5,
    "validation_fraction": 0.1,
    "seed": 0,
    "k": 5,
}


def load_config(path) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, raw = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
            key = key.strip()
            raw = raw.strip()
            if key not in _CONFIG_TYPES:
                raise ConfigError(f"{path}:{line_no}: unknown setting {key!r}")
            try:
                values[key] = _CONFIG_TYPES[key](raw)
            except ValueError as exc:
                raise ConfigError(f"{path}:{line_no}: bad value for {key}: {exc}") from exc
    return values


class Settings:
    """Flag > config file > default, per key."""

    def __init__(self, args: argparse.Namespace):
        self._args = args
        path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
        self._config = load_config(path) if path else {}

    def get(self, key):
        value = getattr(self._args, key, None)
        if value is not None:
            return value
        if key in self._config:
            return self._config[key]
        return _DEFAULTS.get(key)

    def require(self, key):
        value = self.get(key)
        if value is None:
            flag = "--" + key.replace("_", "-")
            raise ConfigError(f"missing required setting {key!r} (pass {flag} or set it in the config)")
        return value


def _guard_overwrite(path, force: bool) -> None:
    if path and os.path.exists(path) and not force:
        raise OverwriteError(f"refusing to overwrite {path} (pass --force)")


def _policies(settings: Settings):
    quantile = settings.get("quantile")
    if quantile is not None:
        return tuple(LabelPolicy(h, Quantile(quantile)) for h in HORIZONS)
    return default_policies(
        (settings.get("threshold3"), settings.get("threshold5"), settings.get("threshold10"))
    )


def _stopwords(settings: Settings):
    path = settings.get("stopwords")
    return load_stopwords(path) if path else DEFAULT_STOPWORDS


def _load_labels(settings: Settings, records) -> dict[str, str]:
    horizon = settings.get("horizon")
    if horizon not in HORIZONS:
        raise ConfigError(f"horizon must be one of {HORIZONS}, got {horizon}")
    labels_path = settings.get("labels")
    if labels_path:
        labeled = read_labeled_table(labels_path)
    else:
        labeled = assign_labels(records, _policies(settings))
    return labels_map(labeled, horizon)


def _load_examples(settings: Settings):
    """Returns (records, labels, examples, d_e)."""
    records = parse_corpus(settings.require("corpus"))
    labels = _load_labels(settings, records)
    m = settings.get("m")
    embeddings_path = settings.get("embeddings")
    if embeddings_path:
        emb = read_embeddings(embeddings_path)
        if not emb:
            raise CorpusError(f"{embeddings_path} contains no records")
        d_e = embeddings_d_e(emb)
        examples = examples_from_embeddings(emb, labels, m)
    else:
        d_e = settings.get("d_e")
        provider = HashedEmbedder(d_e, settings.get("embedder_seed"))
        examples = build_examples(
            records,
            labels,
            provider,
            m,
            claim_filter=settings.get("claim_filter"),
            stopwords=_stopwords(settings),
            max_tokens=settings.get("max_tokens"),
        )
    if not examples:
        raise CorpusError("corpus produced no usable examples")
    return records, labels, examples, d_e


def _model_config(settings: Settings, d_e: int) -> ModelConfig:
    return ModelConfig(
        d_e=d_e,
        m=settings.get("m"),
        n_encoders=settings.get("n_encoders"),
        ffn_mult=settings.get("ffn_mult"),
        dropout=settings.get("dropout"),
        init_seed=settings.get("init_seed"),
    )


def _train_config(settings: Settings) -> TrainConfig:
    return TrainConfig(
        learning_rate=settings.get("learning_rate"),
        batch_size=settings.get("batch_size"),
        max_epochs=settings.get("max_epochs"),
        patience=settings.get("patience"),
        validation_fraction=settings.get("validation_fraction"),
        seed=settings.get("seed"),
    )


def _load_checkpoint_for(settings: Settings, d_e: int):
    params = load_model(settings.require("checkpoint"))
    if params.config.d_e != d_e:
        raise ConfigError(
            f"checkpoint expects d_e={params.config.d_e} but the data provides {d_e}"
        )
    if params.config.m != settings.get("m"):
        raise ConfigError(
            f"checkpoint expects m={params.config.m}; pass --m {params.config.m}"
        )
    return params


def _claims_by_id(records, claim_filter: str) -> dict[str, list]:
    return {r.patent_id: filter_claims(r, claim_filter) for r in records}


def _score_entries(records, examples, claim_filter: str):
    claims = _claims_by_id(records, claim_filter)
    return [(ex.patent_id, claims[ex.patent_id], ex.matrix) for ex in examples]


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# --- subcommand handlers ---


def _cmd_ingest(settings: Settings, args) -> int:
    _guard_overwrite(args.out, args.force)
    records = parse_corpus(settings.require("corpus"))
    policies = _policies(settings)
    labeled = assign_labels(records, policies)
    write_labeled_table(args.out, labeled)
    for horizon, policy in zip(HORIZONS, policies):
        threshold = policy.resolve_threshold(
            [r.citations_within(horizon) for r in records]
        )
        pbt = sum(1 for lp in labeled if lp.cls(horizon) == PBT)
        print(f"horizon {horizon}y: threshold {threshold}, {pbt}/{len(labeled)} PBT")
    print(f"wrote {args.out}")
    return 0


def _cmd_embed(settings: Settings, args) -> int:
    records = parse_corpus(settings.require("corpus"))
    claim_filter = settings.get("claim_filter")
    stopwords = _stopwords(settings)
    max_tokens = settings.get("max_tokens")

    if args.check:
        emb = read_embeddings(args.check)
        by_id = {e.patent_id: e for e in emb}
        for record in records:
            entry = by_id.get(record.patent_id)
            if entry is None:
                raise FormatError(f"{args.check}: no record for patent {record.patent_id}")
            expected = len(filter_claims(record, claim_filter))
            if entry.vectors.shape[0] != expected:
                raise FormatError(
                    f"{args.check}: patent {record.patent_id} has "
                    f"{entry.vectors.shape[0]} claim vectors, corpus has {expected} "
                    f"claims under filter {claim_filter!r}"
                )
        print(f"OK: {len(records)} patents covered, d_e={embeddings_d_e(emb)}")
        return 0

    if not args.out:
        raise ConfigError("embed needs --out (or --check to validate an existing file)")
    _guard_overwrite(args.out, args.force)
    provider = HashedEmbedder(settings.get("d_e"), settings.get("embedder_seed"))
    entries = []
    for record in records:
        claims = filter_claims(record, claim_filter)
        vectors = np.zeros((len(claims), provider.d_e), dtype=np.float32)
        for i, claim in enumerate(claims):
            tokens = preprocess_claim(claim, stopwords, max_tokens).tokens
            vectors[i] = mean_claim_vector(provider, tokens)
        entries.append((record.patent_id, vectors))
    write_embeddings(args.out, entries)
    print(f"wrote {args.out}: {len(entries)} patents, d_e={provider.d_e}")
    return 0


def _cmd_train(settings: Settings, args) -> int:
    _guard_overwrite(args.out_checkpoint, args.force)
    _guard_overwrite(args.report, args.force)
    _, _, examples, d_e = _load_examples(settings)
    train_config = _train_config(settings)
    labels = [ex.label for ex in examples]
    train_set, val_set = stratified_split(
        examples, labels, 1.0 - train_config.validation_fraction, train_config.seed
    )
    if not val_set:
        raise TrainingError("validation split is empty; raise validation_fraction")
    params, report = train_model(train_set, val_set, _model_config(settings, d_e), train_config)
    save_model(args.out_checkpoint, params)
    if args.report:
        write_train_report(args.report, report)
    print(
        f"trained {report.epochs_run} epochs (stop: {report.stop_reason}), "
        f"best epoch {report.best_epoch}, val accuracy {report.final_metrics.accuracy:.3f}"
    )
    print(f"wrote {args.out_checkpoint}")
    return 0


def _cmd_cv(settings: Settings, args) -> int:
    _guard_overwrite(args.out, args.force)
    _, _, examples, d_e = _load_examples(settings)
    k = args.k if args.k is not None else settings.get("k")
    report = cross_validate(examples, _model_config(settings, d_e), _train_config(settings), k=k)
    lines = ["fold\taccuracy\tprecision_overall\trecall_overall\tf1_overall\tmcc"]
    for i, m in enumerate(report.fold_metrics, start=1):
        lines.append(
            f"{i}\t{m.accuracy:.6f}\t{m.precision_overall:.6f}"
            f"\t{m.recall_overall:.6f}\t{m.f1_overall:.6f}\t{m.mcc:.6f}"
        )
    summary = report.summary()
    for stat, pos in (("mean", 0), ("std", 1)):
        lines.append(
            f"{stat}\t" + "\t".join(
                f"{summary[field][pos]:.6f}"
                for field in ("accuracy", "precision_overall", "recall_overall", "f1_overall", "mcc")
            )
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        _write_text(args.out, text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _cmd_evaluate(settings: Settings, args) -> int:
    _guard_overwrite(args.out, args.force)
    _, _, examples, d_e = _load_examples(settings)
    params = _load_checkpoint_for(settings, d_e)
    table = render_metrics_table(evaluate(params, examples))
    if args.out:
        _write_text(args.out, table)
        print(f"wrote {args.out}")
    else:
        print(table, end="")
    return 0


def _cmd_predict(settings: Settings, args) -> int:
    _guard_overwrite(args.out, args.force)
    _, labels, examples, d_e = _load_examples(settings)
    params = _load_checkpoint_for(settings, d_e)
    lines = ["patent_id\tclass_true\tclass_pred\tp_pbt"]
    for ex in examples:
        logits, _ = model_forward(ex.matrix, params)
        pred = predict_class(logits)
        lines.append(f"{ex.patent_id}\t{ex.label}\t{pred.label}\t{pred.p_pbt:.6f}")
    text = "\n".join(lines) + "\n"
    if args.out:
        _write_text(args.out, text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _cmd_explain(settings: Settings, args) -> int:
    _guard_overwrite(args.out, args.force)
    records, _, examples, d_e = _load_examples(settings)
    params = _load_checkpoint_for(settings, d_e)
    wanted = [ex for ex in examples if ex.patent_id == args.patent_id]
    if not wanted:
        raise CorpusError(f"patent {args.patent_id} not found among usable examples")
    claims = _claims_by_id(records, settings.get("claim_filter"))[args.patent_id]
    report = explain(args.patent_id, claims, wanted[0].matrix, params)
    write_explanation(args.out, report)
    print(
        f"{args.patent_id}: {report.prediction} (p_pbt={report.p_pbt:.4f}), "
        f"pivotal claim {report.max_claim_index}"
    )
    print(f"wrote {args.out}")
    return 0


def _cmd_ttest(settings: Settings, args) -> int:
    _guard_overwrite(args.out, args.force)
    records, _, examples, d_e = _load_examples(settings)
    params = _load_checkpoint_for(settings, d_e)
    scores = collect_claim_scores(
        _score_entries(records, examples, settings.get("claim_filter")), params
    )
    independent, dependent = split_scores_by_type(scores)
    result = welch_ttest(independent, dependent)
    table = render_ttest_table(result)
    if args.out:
        _write_text(args.out, table)
        print(f"wrote {args.out}")
    else:
        print(table, end="")
    return 0


_SVG_COLORS = ("#4477aa", "#ee6677", "#228833", "#ccbb44")


def render_histogram_svg(
    groups: dict[str, list[float]],
    bins: int = 10,
    lo: float = 0.0,
    hi: float = 1.0,
    title: str = "Normalized claim score distribution",
) -> str:
    """Small static grouped histogram; output is pure deterministic text."""
    if bins < 1 or hi <= lo:
        raise ValueError("need bins >= 1 and hi > lo")
    names = sorted(groups)
    counts = {name: [0] * bins for name in names}
    for name in names:
        for value in groups[name]:
            b = int((value - lo) / (hi - lo) * bins)
            counts[name][min(max(b, 0), bins - 1)] += 1
    peak = max((max(c) for c in counts.values()), default=0) or 1

    width, height = 640, 360
    ml, mr, mt, mb = 60, 20, 40, 50
    plot_w, plot_h = width - ml - mr, height - mt - mb
    bin_w = plot_w / bins
    bar_w = bin_w / (len(names) + 1) if names else bin_w

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-size="16">{title}</text>',
        f'<line x1="{ml}" y1="{mt + plot_h}" x2="{ml + plot_w}" y2="{mt + plot_h}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + plot_h}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="12">normalized claim score</text>',
        f'<text x="16" y="{mt - 8}" font-size="12">count (max {peak})</text>',
    ]
    for b in range(bins + 1):
        x = ml + b * bin_w
        label = lo + (hi - lo) * b / bins
        parts.append(
            f'<text x="{x:.1f}" y="{mt + plot_h + 16}" text-anchor="middle" '
            f'font-size="10">{label:.1f}</text>'
        )
    for gi, name in enumerate(names):
        color = _SVG_COLORS[gi % len(_SVG_COLORS)]
        for b, count in enumerate(counts[name]):
            bar_h = plot_h * count / peak
            x = ml + b * bin_w + (gi + 0.5) * bar_w
            y = mt + plot_h - bar_h
            parts.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w:.1f}" '
                f'height="{bar_h:.1f}" fill="{color}"/>'
            )
        parts.append(
            f'<rect x="{ml + plot_w - 150}" y="{mt + 16 * gi}" width="12" height="12" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{ml + plot_w - 134}" y="{mt + 16 * gi + 10}" font-size="12">{name} '
            f'(n={len(groups[name])})</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _cmd_report(settings: Settings, args) -> int:
    records, _, examples, d_e = _load_examples(settings)
    params = _load_checkpoint_for(settings, d_e)
    os.makedirs(args.out_dir, exist_ok=True)
    metrics_path = os.path.join(args.out_dir, "metrics.tsv")
    svg_path = os.path.join(args.out_dir, "scores.svg")
    ttest_path = os.path.join(args.out_dir, "ttest.txt")
    for path in (metrics_path, svg_path, ttest_path):
        _guard_overwrite(path, args.force)

    _write_text(metrics_path, render_metrics_table(evaluate(params, examples)))
    scores = collect_claim_scores(
        _score_entries(records, examples, settings.get("claim_filter")), params
    )
    independent, dependent = split_scores_by_type(scores)
    _write_text(
        svg_path,
        render_histogram_svg({"independent": independent, "dependent": dependent}),
    )
    written = [metrics_path, svg_path]
    if len(independent) >= 2 and len(dependent) >= 2:
        _write_text(ttest_path, render_ttest_table(welch_ttest(independent, dependent)))
        written.append(ttest_path)
    else:
        print("skipping t-test: need at least two scores per claim type", file=sys.stderr)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_synth(settings: Settings, args) -> int:
    _guard_overwrite(args.out, args.force)
    _guard_overwrite(args.key_out, args.force)
    n, n_pbt = write_synthetic_corpus(
        args.out, args.key_out, args.n, args.pbt_fraction, args.seed
    )
    print(f"wrote {args.out} ({n} patents, {n_pbt} PBT) and {args.key_out}")
    return 0


# --- parser wiring ---


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help=f"config file (default: ${CONFIG_ENV_VAR})")
    sub.add_argument("--force", action="store_true", help="overwrite existing outputs")


def _add_label_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--labels", help="labeled table from `ingest` (else labels are computed)")
    sub.add_argument("--horizon", type=int, choices=HORIZONS, help="label horizon in years")
    sub.add_argument("--threshold3", type=int)
    sub.add_argument("--threshold5", type=int)
    sub.add_argument("--threshold10", type=int)
    sub.add_argument("--quantile", type=float, help="use a top-quantile threshold instead")


def _add_data_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--corpus", help="JSONL corpus file")
    sub.add_argument("--embeddings", help="CEMB file of precomputed claim vectors")
    sub.add_argument("--claim-filter", dest="claim_filter", choices=("independent_only", "all"))
    sub.add_argument("--max-tokens", dest="max_tokens", type=int)
    sub.add_argument("--m", type=int, help="claim slots per patent")
    sub.add_argument("--d-e", dest="d_e", type=int, help="hashed embedding width")
    sub.add_argument("--embedder-seed", dest="embedder_seed", type=int)
    sub.add_argument("--stopwords", help="stopword file, one word per line")
    _add_label_flags(sub)


def _add_model_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n-encoders", dest="n_encoders", type=int)
    sub.add_argument("--ffn-mult", dest="ffn_mult", type=int)
    sub.add_argument("--dropout", type=float)
    sub.add_argument("--init-seed", dest="init_seed", type=int)


def _add_train_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--learning-rate", dest="learning_rate", type=float)
    sub.add_argument("--batch-size", dest="batch_size", type=int)
    sub.add_argument("--max-epochs", dest="max_epochs", type=int)
    sub.add_argument("--patience", type=int)
    sub.add_argument("--validation-fraction", dest="validation_fraction", type=float)
    sub.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="claimscreen",
        description="Patent claim screening: PBT/MT prediction with claim-level attention",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("ingest", help="parse, label, and write the labeled table")
    _add_common(sub)
    sub.add_argument("--corpus")
    _add_label_flags(sub)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=_cmd_ingest)

    sub = commands.add_parser("embed", help="write hashed claim vectors, or --check a CEMB file")
    _add_common(sub)
    sub.add_argument("--corpus")
    sub.add_argument("--claim-filter", dest="claim_filter", choices=("independent_only", "all"))
    sub.add_argument("--max-tokens", dest="max_tokens", type=int)
    sub.add_argument("--d-e", dest="d_e", type=int)
    sub.add_argument("--embedder-seed", dest="embedder_seed", type=int)
    sub.add_argument("--stopwords")
    sub.add_argument("--out")
    sub.add_argument("--check", help="validate this CEMB file against the corpus and exit")
    sub.set_defaults(func=_cmd_embed)

    sub = commands.add_parser("train", help="train and write a checkpoint")
    _add_common(sub)
    _add_data_flags(sub)
    _add_model_flags(sub)
    _add_train_flags(sub)
    sub.add_argument("--out-checkpoint", dest="out_checkpoint", required=True)
    sub.add_argument("--report", help="write the per-epoch loss table here")
    sub.set_defaults(func=_cmd_train)

    sub = commands.add_parser("cv", help="stratified k-fold cross-validation")
    _add_common(sub)
    _add_data_flags(sub)
    _add_model_flags(sub)
    _add_train_flags(sub)
    sub.add_argument("--k", type=int)
    sub.add_argument("--out")
    sub.set_defaults(func=_cmd_cv)

    sub = commands.add_parser("evaluate", help="metrics table for a checkpoint on a corpus")
    _add_common(sub)
    _add_data_flags(sub)
    sub.add_argument("--checkpoint")
    sub.add_argument("--out")
    sub.set_defaults(func=_cmd_evaluate)

    sub = commands.add_parser("predict", help="per-patent predictions")
    _add_common(sub)
    _add_data_flags(sub)
    sub.add_argument("--checkpoint")
    sub.add_argument("--out")
    sub.set_defaults(func=_cmd_predict)

    sub = commands.add_parser("explain", help="per-claim attention report for one patent")
    _add_common(sub)
    _add_data_flags(sub)
    sub.add_argument("--checkpoint")
    sub.add_argument("--patent-id", dest="patent_id", required=True)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=_cmd_explain)

    sub = commands.add_parser("ttest", help="Welch t-test of scores by claim type")
    _add_common(sub)
    _add_data_flags(sub)
    sub.add_argument("--checkpoint")
    sub.add_argument("--out")
    sub.set_defaults(func=_cmd_ttest)

    sub = commands.add_parser("report", help="metrics table, score histogram SVG, and t-test")
    _add_common(sub)
    _add_data_flags(sub)
    sub.add_argument("--checkpoint")
    sub.add_argument("--out-dir", dest="out_dir", required=True)
    sub.set_defaults(func=_cmd_report)

    sub = commands.add_parser("synth", help="generate the planted-token synthetic corpus")
    _add_common(sub)
    sub.add_argument("--n", type=int, default=200)
    sub.add_argument("--pbt-fraction", dest="pbt_fraction", type=float, default=0.1)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True)
    sub.add_argument("--key-out", dest="key_out", required=True)
    sub.set_defaults(func=_cmd_synth)

    return parser


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        settings = Settings(args)
        return args.func(settings, args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename or exc}", file=sys.stderr)
        return 3
    except (CorpusError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ConfigError, ShapeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except OverwriteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 6
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 7
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
