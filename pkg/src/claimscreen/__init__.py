"""Patent claim screening: predict breakthrough potential from claim text
with a from-scratch attention network, and explain predictions claim by
claim."""

from .corpus import (
    DEFAULT_STOPWORDS,
    DEPENDENT,
    HORIZONS,
    INDEPENDENT,
    MT,
    PBT,
    FixedThreshold,
    LabelPolicy,
    LabeledPatent,
    PatentRecord,
    Quantile,
    RawClaim,
    TokenizedClaim,
    assign_labels,
    classify_claim_type,
    default_policies,
    filter_claims,
    labels_map,
    load_stopwords,
    parse_corpus,
    preprocess_claim,
    read_labeled_table,
    stratified_kfold,
    stratified_split,
    write_labeled_table,
)
from .embed import (
    ClaimMatrix,
    EmbeddingRecord,
    HashedEmbedder,
    build_claim_matrix,
    matrix_from_rows,
    mean_claim_vector,
    read_embeddings,
    write_embeddings,
)
from .errors import (
    ConfigError,
    CorpusError,
    EngineError,
    FormatError,
    NonFiniteError,
    OverwriteError,
    ShapeError,
    TrainingError,
)
from .autodiff import Adam, GradCheckReport, Tensor, grad_check
from .checkpoint import Checkpoint, read_checkpoint, write_checkpoint
from .model import (
    CLASS_INDEX,
    AttentionRecord,
    EncoderParams,
    ModelConfig,
    ModelParams,
    Prediction,
    encoder_forward,
    init_params,
    load_model,
    model_forward,
    predict_class,
    save_model,
)
from .metrics import ConfusionMatrix, Metrics, compute_metrics, confusion, render_metrics_table
from .interpret import (
    ClaimScore,
    ExplanationReport,
    WelchResult,
    claim_scores,
    collect_claim_scores,
    explain,
    normalize_scores,
    read_explanation,
    render_ttest_table,
    split_scores_by_type,
    welch_ttest,
    write_explanation,
)
from .train import (
    BATCH_GRID,
    LR_GRID,
    CVReport,
    Example,
    TrainConfig,
    TrainReport,
    build_examples,
    cross_validate,
    evaluate,
    examples_from_embeddings,
    grid_search,
    train_model,
)
from .synth import PLANT_TOKENS, generate_synthetic_corpus, read_key, write_synthetic_corpus

__version__ = "0.1.0"
