"""Export per-claim transformer embeddings into the CEMB format.

The screening engine consumes claim vectors through CEMB files; this
package produces them from any BERT-family model: tokenize each claim
with the model's own tokenizer, run the frozen model in evaluation mode,
and mean-pool the final hidden states of the claim's real tokens
(special and padding positions excluded).
"""

from .corpus import CorpusError, Claim, Patent, filter_claims, parse_corpus
from .export import ExportError, ExportJob, MODEL_IDS, export, resolve_model
from .writer import FormatError, write_cemb

__all__ = [
    "Claim",
    "CorpusError",
    "ExportError",
    "ExportJob",
    "FormatError",
    "MODEL_IDS",
    "Patent",
    "export",
    "filter_claims",
    "parse_corpus",
    "resolve_model",
    "write_cemb",
]
