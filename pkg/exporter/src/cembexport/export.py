"""Run a frozen pre-trained language model over patent claims.

Each claim text is tokenized with the model's own tokenizer (truncated at
the job's max token length, padded to it for batch-shape stability) and
passed through the model in evaluation mode with gradients disabled. The
claim vector is the mean of the final-layer hidden states over the claim's
real tokens: special tokens (CLS/SEP/...) and padding positions are
excluded from the mean. A claim whose tokenization yields no real tokens
gets a zero vector and a warning.

Records are written in corpus order, one per patent — including patents
whose filtered claim list is empty — so the output always validates
against the screening engine's corpus-coverage check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import filter_claims, parse_corpus
from .writer import write_cemb

# Short names for the published checkpoints this exporter is built around.
# Any other value is passed through to transformers untouched, so local
# directories and full hub ids work as well.
MODEL_IDS = {
    "patentbert": "anferico/bert-for-patents",
    "bert": "bert-base-uncased",
    "scibert": "allenai/scibert_scivocab_uncased",
    "biobert": "dmis-lab/biobert-base-cased-v1.1",
    "pubmedbert": "microsoft/BiomedNLP-PubMedBERT-base-uncased-abstract-fulltext",
}


class ExportError(Exception):
    """Raised when an export job cannot run."""


def resolve_model(name: str) -> str:
    """Map a short model name to its hub id; unknown names pass through."""
    return MODEL_IDS.get(name, name)


@dataclass
class ExportJob:
    model: str
    corpus: str | Path
    out: str | Path
    max_tokens: int = 512
    device: str = "cpu"
    batch_size: int = 16
    claim_filter: str = "independent_only"

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.claim_filter not in ("independent_only", "all"):
            raise ValueError(f"unknown claim filter {self.claim_filter!r}")


@dataclass
class ExportReport:
    n_patents: int
    n_claims: int
    d_e: int
    zero_token_claims: int


def _load_model(name: str, device: str):
    import torch
    from transformers import AutoModel, AutoTokenizer

    model_id = resolve_model(name)
    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except Exception as exc:
        raise ExportError(f"cannot load model {model_id!r}: {exc}") from exc
    model.to(torch.device(device))
    model.eval()
    return tokenizer, model


def _embed_batch(texts, tokenizer, model, max_tokens: int, device: str) -> tuple[np.ndarray, np.ndarray]:
    """Claim vectors for one batch of texts: (n, hidden) float32, kept-token counts (n,)."""
    import torch

    enc = tokenizer(
        texts,
        padding="max_length",
        truncation=True,
        max_length=max_tokens,
        return_special_tokens_mask=True,
        return_tensors="pt",
    )
    special = enc.pop("special_tokens_mask")
    enc = {k: v.to(torch.device(device)) for k, v in enc.items()}
    keep = enc["attention_mask"].bool() & ~special.to(enc["attention_mask"].device).bool()
    with torch.no_grad():
        hidden = model(**enc).last_hidden_state  # (n, max_tokens, hidden)
    counts = keep.sum(dim=1)  # (n,)
    summed = (hidden * keep.unsqueeze(-1)).sum(dim=1)
    vectors = summed / counts.clamp(min=1).unsqueeze(-1)
    vectors = vectors * (counts > 0).unsqueeze(-1)  # zero vector for empty claims
    return (
        vectors.to(torch.float32).cpu().numpy(),
        counts.cpu().numpy(),
    )


def export(job: ExportJob) -> ExportReport:
    """Run ``job`` and write its CEMB file; returns summary counts."""
    patents = parse_corpus(job.corpus)
    tokenizer, model = _load_model(job.model, job.device)

    limit = getattr(model.config, "max_position_embeddings", None)
    if limit is not None and job.max_tokens > limit:
        raise ExportError(
            f"max_tokens {job.max_tokens} exceeds the model's context window {limit}"
        )
    hidden = model.config.hidden_size

    # Flatten claims across patents so batches fill up regardless of how
    # many claims each patent has; (patent position, claim index) tags let
    # us regroup rows and name zero-token claims in warnings.
    texts: list[str] = []
    tags: list[tuple[int, int]] = []
    per_patent: list[int] = []
    for pos, patent in enumerate(patents):
        claims = filter_claims(patent, job.claim_filter)
        per_patent.append(len(claims))
        for claim in claims:
            texts.append(claim.text)
            tags.append((pos, claim.index))

    rows = np.zeros((len(texts), hidden), dtype=np.float32)
    zero_claims = 0
    for start in range(0, len(texts), job.batch_size):
        batch = texts[start : start + job.batch_size]
        vectors, counts = _embed_batch(batch, tokenizer, model, job.max_tokens, job.device)
        rows[start : start + len(batch)] = vectors
        for offset in np.flatnonzero(counts == 0):
            pos, claim_index = tags[start + int(offset)]
            zero_claims += 1
            warnings.warn(
                f"patent {patents[pos].patent_id} claim {claim_index}: no real "
                "tokens after tokenization; writing a zero vector",
                stacklevel=2,
            )

    entries = []
    cursor = 0
    for patent, n_claims in zip(patents, per_patent):
        entries.append((patent.patent_id, rows[cursor : cursor + n_claims]))
        cursor += n_claims
    write_cemb(job.out, entries)
    return ExportReport(len(patents), len(texts), hidden, zero_claims)
