"""Claim-level interpretation of a trained model.

Raw importance of a claim is the total attention it receives from all
active claims in the final encoder (column sum of the last attention
matrix), so raw scores over a patent sum to k. Scores are normalized per
patent by dividing by the patent maximum, putting the most pivotal claim
at exactly 1. A Welch two-tailed t-test compares score populations
between claim types (group 1 independent, group 2 dependent).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import stdtr

from .corpus import DEPENDENT, INDEPENDENT, RawClaim
from .embed import ClaimMatrix
from .errors import FormatError
from .model import AttentionRecord, ModelParams, column_scores, model_forward, predict_class

_EXCERPT_CHARS = 80


@dataclass(frozen=True)
class ClaimScore:
    patent_id: str
    claim_index: int
    claim_type: str
    raw: float
    normalized: float

    def __post_init__(self):
        if self.raw < 0:
            raise ValueError(f"raw score must be non-negative, got {self.raw}")
        if not 0.0 < self.normalized <= 1.0:
            raise ValueError(f"normalized score must lie in (0, 1], got {self.normalized}")


def claim_scores(att: AttentionRecord) -> np.ndarray:
    """Raw scores of the active claims, by the column-sum rule."""
    return column_scores(att.last_matrix, att.active_count)[: att.active_count]


def normalize_scores(raw: Sequence[float], mode: str = "max") -> np.ndarray:
    """Per-patent normalization: divide by the max (default) or the mean.

    Only max-normalized scores fit ClaimScore's (0, 1] range; the mean
    mode is offered for aggregate comparisons where scores center on 1.
    """
    scores = np.asarray(raw, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("no scores to normalize")
    if mode == "max":
        denom = float(scores.max())
    elif mode == "mean":
        denom = float(scores.mean())
    else:
        raise ValueError(f"unknown normalization mode {mode!r}")
    if denom <= 0.0:
        raise ValueError("attention scores are all zero")
    return scores / denom


@dataclass(frozen=True)
class ExplanationLine:
    claim_index: int
    claim_type: str
    raw: float
    normalized: float
    excerpt: str


@dataclass(frozen=True)
class ExplanationReport:
    patent_id: str
    prediction: str
    p_pbt: float
    lines: tuple[ExplanationLine, ...]
    max_claim_index: int
    min_claim_index: int
    tied: bool


def _excerpt(text: str) -> str:
    flat = " ".join(text.split())
    return flat[:_EXCERPT_CHARS]


def explain(
    patent_id: str,
    claims: Sequence[RawClaim],
    matrix: ClaimMatrix,
    params: ModelParams,
) -> ExplanationReport:
    """Run the model on one patent and report per-claim attention scores.

    ``claims`` must be the claims the matrix rows were built from, in row
    order; only the first ``matrix.active_count`` are reported.
    """
    k = matrix.active_count
    if len(claims) < k:
        raise ValueError(f"got {len(claims)} claims for a matrix with {k} active rows")
    logits, att = model_forward(matrix, params, train_mode=False)
    prediction = predict_class(logits)
    raw = claim_scores(att)
    normalized = normalize_scores(raw)
    max_pos = int(np.argmax(raw))
    min_pos = int(np.argmin(raw))
    tied = bool(np.isclose(raw, raw[max_pos]).sum() > 1)
    lines = tuple(
        ExplanationLine(
            claim_index=claims[i].index,
            claim_type=claims[i].claim_type,
            raw=float(raw[i]),
            normalized=float(normalized[i]),
            excerpt=_excerpt(claims[i].text),
        )
        for i in range(k)
    )
    return ExplanationReport(
        patent_id=patent_id,
        prediction=prediction.label,
        p_pbt=prediction.p_pbt,
        lines=lines,
        max_claim_index=claims[max_pos].index,
        min_claim_index=claims[min_pos].index,
        tied=tied,
    )


def write_explanation(path, report: ExplanationReport) -> None:
    """Plain-text report; floats written with repr so reads are lossless."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"patent_id\t{report.patent_id}\n")
        fh.write(f"prediction\t{report.prediction}\n")
        fh.write(f"p_pbt\t{report.p_pbt!r}\n")
        fh.write(f"max_claim\t{report.max_claim_index}\n")
        fh.write(f"min_claim\t{report.min_claim_index}\n")
        fh.write(f"tie\t{'yes' if report.tied else 'no'}\n")
        fh.write("claim\ttype\tscore_raw\tscore_norm\texcerpt\n")
        for line in report.lines:
            fh.write(
                f"{line.claim_index}\t{line.claim_type}\t{line.raw!r}\t"
                f"{line.normalized!r}\t{line.excerpt}\n"
            )


def read_explanation(path) -> ExplanationReport:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    rows = [line.split("\t") for line in text.splitlines()]
    try:
        header = {row[0]: row[1] for row in rows[:6]}
        lines = tuple(
            ExplanationLine(
                claim_index=int(row[0]),
                claim_type=row[1],
                raw=float(row[2]),
                normalized=float(row[3]),
                excerpt=row[4] if len(row) > 4 else "",
            )
            for row in rows[7:]
        )
        return ExplanationReport(
            patent_id=header["patent_id"],
            prediction=header["prediction"],
            p_pbt=float(header["p_pbt"]),
            lines=lines,
            max_claim_index=int(header["max_claim"]),
            min_claim_index=int(header["min_claim"]),
            tied=header["tie"] == "yes",
        )
    except (KeyError, IndexError, ValueError) as exc:
        raise FormatError(f"malformed explanation report {path}: {exc}") from exc


@dataclass(frozen=True)
class WelchResult:
    t_statistic: float
    df: float
    p_value: float
    n1: int
    n2: int
    mean1: float
    mean2: float
    var1: float
    var2: float


def welch_ttest(group1: Sequence[float], group2: Sequence[float]) -> WelchResult:
    """Two-tailed Welch t-test for unequal sizes and variances."""
    a = np.asarray(group1, dtype=np.float64)
    b = np.asarray(group2, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each group needs at least two observations")
    mean1, mean2 = a.mean(), b.mean()
    var1 = a.var(ddof=1)
    var2 = b.var(ddof=1)
    if var1 == 0.0 and var2 == 0.0:
        raise ValueError("both groups have zero variance")
    se1 = var1 / a.size
    se2 = var2 / b.size
    t = (mean1 - mean2) / np.sqrt(se1 + se2)
    df = (se1 + se2) ** 2 / (se1**2 / (a.size - 1) + se2**2 / (b.size - 1))
    p = 2.0 * stdtr(df, -abs(t))
    return WelchResult(
        t_statistic=float(t),
        df=float(df),
        p_value=float(p),
        n1=int(a.size),
        n2=int(b.size),
        mean1=float(mean1),
        mean2=float(mean2),
        var1=float(var1),
        var2=float(var2),
    )


def collect_claim_scores(
    entries: Iterable[tuple[str, Sequence[RawClaim], ClaimMatrix]],
    params: ModelParams,
) -> list[ClaimScore]:
    """Score every active claim of every (patent_id, claims, matrix) entry."""
    out: list[ClaimScore] = []
    for patent_id, claims, matrix in entries:
        k = matrix.active_count
        if len(claims) < k:
            raise ValueError(
                f"patent {patent_id}: got {len(claims)} claims for {k} active rows"
            )
        _, att = model_forward(matrix, params, train_mode=False)
        raw = claim_scores(att)
        normalized = normalize_scores(raw)
        out.extend(
            ClaimScore(
                patent_id=patent_id,
                claim_index=claims[i].index,
                claim_type=claims[i].claim_type,
                raw=float(raw[i]),
                normalized=float(normalized[i]),
            )
            for i in range(k)
        )
    return out


def split_scores_by_type(scores: Iterable[ClaimScore]) -> tuple[list[float], list[float]]:
    """Normalized scores split into (independent, dependent) groups."""
    independent: list[float] = []
    dependent: list[float] = []
    for score in scores:
        if score.claim_type == INDEPENDENT:
            independent.append(score.normalized)
        elif score.claim_type == DEPENDENT:
            dependent.append(score.normalized)
        else:
            raise ValueError(f"unknown claim type {score.claim_type!r}")
    return independent, dependent


def render_ttest_table(result: WelchResult, delimiter: str = "\t") -> str:
    """Rows in the published report order: t, df, group-1 mean/variance,
    group-2 mean/variance, p."""
    rows = [
        ("t-statistic", f"{result.t_statistic:.6g}"),
        ("Degree of freedom", f"{result.df:.6g}"),
        ("Mean of scores in group 1", f"{result.mean1:.6g}"),
        ("Variance of scores in group 1", f"{result.var1:.6g}"),
        ("Mean of scores in group 2", f"{result.mean2:.6g}"),
        ("Variance of scores in group 2", f"{result.var2:.6g}"),
        ("p-value", f"{result.p_value:.6g}"),
    ]
    return "\n".join(delimiter.join(row) for row in rows) + "\n"
