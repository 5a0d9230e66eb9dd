"""Shared fixtures: a tiny local BERT checkpoint and a sample corpus.

The model is built once per session with fixed random weights and saved to
disk, then loaded back through the same AutoModel/AutoTokenizer path the
exporter uses for published checkpoints — no network access required.
"""

import json
import os

import pytest

# Never reach for the hub during tests, even on typos.
os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "a", "an", "the", "method", "of", "treating", "waste", "using",
    "catalyst", "claim", "claims", "1", "2", "wherein", "is", "palladium",
    "apparatus", "comprising", "reactor", "composition", "matter", ".",
]

HIDDEN_SIZE = 16
MAX_POSITIONS = 64

# (patent_id, [claim texts]); EX1 mixes independent and dependent claims,
# EX2 repeats one text verbatim, EX3's only claim is two combining accents
# (zero real tokens after the tokenizer strips accents), EX4's single claim
# tokenizes to exactly three vocabulary words.
CORPUS_PATENTS = [
    ("EX1", [
        "A method of treating waste using a catalyst.",
        "The method of claim 1 wherein the catalyst is palladium.",
        "An apparatus comprising a reactor.",
    ]),
    ("EX2", [
        "A composition of matter.",
        "A composition of matter.",
    ]),
    ("EX3", ["́́"]),
    ("EX4", ["method composition apparatus"]),
]


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory):
    import torch
    from transformers import BertConfig, BertModel, BertTokenizer

    directory = tmp_path_factory.mktemp("tinybert")
    vocab_file = directory / "vocab.txt"
    vocab_file.write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    tokenizer = BertTokenizer(vocab_file=str(vocab_file), do_lower_case=True)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=HIDDEN_SIZE,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=MAX_POSITIONS,
    )
    torch.manual_seed(0)
    model = BertModel(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return str(directory)


@pytest.fixture(scope="session")
def corpus_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "sample.jsonl"
    lines = []
    for patent_id, texts in CORPUS_PATENTS:
        lines.append(json.dumps({
            "patent_id": patent_id,
            "grant_date": "2000-01-04",
            "claims": [
                {"index": i, "text": text}
                for i, text in enumerate(texts, start=1)
            ],
        }))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)
