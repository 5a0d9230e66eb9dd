"""Claim-level screening network.

A patent enters as a zero-padded m x d_e matrix of claim vectors with k
active rows. It flows through a stack of single-head self-attention
encoders (residual + LayerNorm, then a GELU feed-forward with dropout),
is mean-pooled over the active rows, squashed through tanh after one more
projection, and scored by a bias-free two-column classifier whose logits
are ordered [t_PBT, t_MT]. The final encoder's attention matrix is kept
for claim-level interpretation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from . import autodiff as ad
from .autodiff import Tensor
from .checkpoint import Checkpoint, read_checkpoint, write_checkpoint
from .corpus import MT, PBT
from .embed import ClaimMatrix
from .errors import FormatError, ShapeError

CLASS_INDEX = {PBT: 0, MT: 1}
INDEX_CLASS = (PBT, MT)


@dataclass(frozen=True)
class ModelConfig:
    d_e: int
    m: int
    n_encoders: int = 4
    ffn_mult: int = 4
    dropout: float = 0.1
    init_seed: int = 0

    def __post_init__(self):
        if self.d_e < 1:
            raise ValueError(f"d_e must be >= 1, got {self.d_e}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.n_encoders < 1:
            raise ValueError(f"n_encoders must be >= 1, got {self.n_encoders}")
        if self.ffn_mult < 1:
            raise ValueError(f"ffn_mult must be >= 1, got {self.ffn_mult}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")

    @property
    def ffn_dim(self) -> int:
        return self.ffn_mult * self.d_e


@dataclass
class EncoderParams:
    w_q: Tensor
    w_k: Tensor
    w_v: Tensor
    w_o: Tensor
    ln1_gain: Tensor
    ln1_bias: Tensor
    w_r: Tensor
    w_s: Tensor
    ln2_gain: Tensor
    ln2_bias: Tensor

    def named(self, prefix: str) -> list[tuple[str, Tensor]]:
        return [
            (f"{prefix}.w_q", self.w_q),
            (f"{prefix}.w_k", self.w_k),
            (f"{prefix}.w_v", self.w_v),
            (f"{prefix}.w_o", self.w_o),
            (f"{prefix}.ln1_gain", self.ln1_gain),
            (f"{prefix}.ln1_bias", self.ln1_bias),
            (f"{prefix}.w_r", self.w_r),
            (f"{prefix}.w_s", self.w_s),
            (f"{prefix}.ln2_gain", self.ln2_gain),
            (f"{prefix}.ln2_bias", self.ln2_bias),
        ]


@dataclass
class ModelParams:
    config: ModelConfig
    encoders: list[EncoderParams]
    w_t: Tensor
    w_cls: Tensor

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        out: list[tuple[str, Tensor]] = []
        for i, enc in enumerate(self.encoders):
            out.extend(enc.named(f"encoder{i}"))
        out.append(("pool.w_t", self.w_t))
        out.append(("classifier.w", self.w_cls))
        return out

    def parameters(self) -> list[Tensor]:
        return [t for _, t in self.named_parameters()]


def column_scores(last_matrix: np.ndarray, k: int) -> np.ndarray:
    """Raw score of claim j: total attention it receives over active rows."""
    if not 1 <= k <= last_matrix.shape[0]:
        raise ShapeError(f"active count {k} out of range for {last_matrix.shape}")
    scores = np.zeros(last_matrix.shape[1], dtype=np.float64)
    scores[:k] = last_matrix[:k, :k].sum(axis=0)
    return scores


@dataclass
class AttentionRecord:
    last_matrix: np.ndarray
    active_count: int
    claim_scores: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.last_matrix.ndim != 2 or self.last_matrix.shape[0] != self.last_matrix.shape[1]:
            raise ShapeError(f"attention matrix must be square, got {self.last_matrix.shape}")
        if self.claim_scores is None:
            self.claim_scores = column_scores(self.last_matrix, self.active_count)


def _xavier(rng: np.random.Generator, fan_in: int, fan_out: int, dtype) -> Tensor:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype))


def init_params(config: ModelConfig, seed: int | None = None, dtype=np.float32) -> ModelParams:
    """Scaled-uniform weight init, LayerNorm gain 1 / bias 0; deterministic per seed."""
    if seed is None:
        seed = config.init_seed
    rng = np.random.default_rng(seed)
    d, f = config.d_e, config.ffn_dim
    encoders = []
    for _ in range(config.n_encoders):
        encoders.append(
            EncoderParams(
                w_q=_xavier(rng, d, d, dtype),
                w_k=_xavier(rng, d, d, dtype),
                w_v=_xavier(rng, d, d, dtype),
                w_o=_xavier(rng, d, d, dtype),
                ln1_gain=Tensor(np.ones((1, d), dtype=dtype)),
                ln1_bias=Tensor(np.zeros((1, d), dtype=dtype)),
                w_r=_xavier(rng, d, f, dtype),
                w_s=_xavier(rng, f, d, dtype),
                ln2_gain=Tensor(np.ones((1, d), dtype=dtype)),
                ln2_bias=Tensor(np.zeros((1, d), dtype=dtype)),
            )
        )
    w_t = _xavier(rng, d, d, dtype)
    w_cls = _xavier(rng, d, 2, dtype)
    return ModelParams(config=config, encoders=encoders, w_t=w_t, w_cls=w_cls)


def _row_mask(m: int, k: int, d: int, dtype) -> np.ndarray:
    mask = np.zeros((m, d), dtype=dtype)
    mask[:k] = 1.0
    return mask


def encoder_forward(
    p_in: Tensor,
    params: EncoderParams,
    k: int,
    *,
    dropout_rate: float = 0.0,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[Tensor, Tensor]:
    """One claim encoder block; returns (P', attention matrix)."""
    m, d = p_in.shape
    if params.w_q.shape != (d, d):
        raise ShapeError(
            f"encoder expects d_e={params.w_q.shape[0]}, got input of width {d}"
        )
    q = p_in @ params.w_q
    key = p_in @ params.w_k
    v = p_in @ params.w_v
    att = ad.softmax_rows(ad.scale(q @ ad.transpose(key), 1.0 / math.sqrt(d)), k)
    single_head = (att @ v) @ params.w_o
    att_out = ad.layer_norm(p_in + single_head, params.ln1_gain, params.ln1_bias)
    hidden = ad.gelu(att_out @ params.w_r)
    hidden = ad.dropout(hidden, dropout_rate, train_mode, rng)
    p_out = ad.layer_norm(att_out + (hidden @ params.w_s), params.ln2_gain, params.ln2_bias)
    # LayerNorm leaves padded rows at its bias value; zero them so padding
    # stays inert for the next block and for pooling.
    p_out = ad.mul_mask(p_out, _row_mask(m, k, d, p_out.data.dtype))
    return p_out, att


def model_forward(
    p: ClaimMatrix,
    params: ModelParams,
    *,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[Tensor, AttentionRecord]:
    """Full network pass; returns (logits [t_PBT, t_MT], AttentionRecord)."""
    cfg = params.config
    if p.d_e != cfg.d_e or p.m != cfg.m:
        raise ShapeError(
            f"claim matrix is {p.m}x{p.d_e}, model expects {cfg.m}x{cfg.d_e}"
        )
    k = p.active_count
    if k == 0:
        raise ValueError("patent has no embeddable claims")
    dtype = params.w_t.data.dtype
    z = Tensor(p.data.astype(dtype, copy=True))
    att = None
    for enc in params.encoders:
        z, att = encoder_forward(
            z, enc, k, dropout_rate=cfg.dropout, train_mode=train_mode, rng=rng
        )
    pooled = ad.mean_rows(z, k)
    s = ad.tanh_act(pooled @ params.w_t)
    logits = s @ params.w_cls
    record = AttentionRecord(last_matrix=att.data.copy(), active_count=k)
    return logits, record


class Prediction(NamedTuple):
    label: str
    p_pbt: float


def predict_class(logits) -> Prediction:
    """Softmax over [t_PBT, t_MT]; PBT iff p(PBT) > 0.5, exact tie goes to MT."""
    if isinstance(logits, Tensor):
        values = logits.data.reshape(-1)
    else:
        values = np.asarray(logits, dtype=np.float64).reshape(-1)
    if values.size != 2:
        raise ShapeError(f"expected two logits, got {values.size}")
    if not np.isfinite(values).all():
        raise ValueError("logits must be finite")
    p_pbt = float(expit(float(values[0]) - float(values[1])))
    label = PBT if p_pbt > 0.5 else MT
    return Prediction(label=label, p_pbt=p_pbt)


def save_model(path, params: ModelParams) -> None:
    cfg = params.config
    write_checkpoint(
        path,
        d_e=cfg.d_e,
        m=cfg.m,
        n_encoders=cfg.n_encoders,
        ffn_mult=cfg.ffn_mult,
        dropout=cfg.dropout,
        blocks={name: t.data for name, t in params.named_parameters()},
    )


def _params_from_checkpoint(ckpt: Checkpoint, dtype) -> ModelParams:
    config = ModelConfig(
        d_e=ckpt.d_e,
        m=ckpt.m,
        n_encoders=ckpt.n_encoders,
        ffn_mult=ckpt.ffn_mult,
        dropout=ckpt.dropout,
    )
    expected = init_params(config, seed=0, dtype=dtype)
    loaded_names = set(ckpt.blocks)
    wanted = expected.named_parameters()
    wanted_names = {name for name, _ in wanted}
    if loaded_names != wanted_names:
        missing = sorted(wanted_names - loaded_names)
        extra = sorted(loaded_names - wanted_names)
        raise FormatError(f"checkpoint block mismatch: missing {missing}, unexpected {extra}")
    for name, tensor in wanted:
        block = ckpt.blocks[name]
        if block.shape != tensor.data.shape:
            raise FormatError(
                f"block {name!r} has shape {block.shape}, expected {tensor.data.shape}"
            )
        tensor.data = block.astype(dtype)
    return expected


def load_model(path, dtype=np.float32) -> ModelParams:
    return _params_from_checkpoint(read_checkpoint(path), dtype)
