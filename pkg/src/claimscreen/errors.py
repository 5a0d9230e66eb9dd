"""Exception types shared across the engine.

The CLI maps these onto distinct exit codes, so keep the categories
coarse: corpus/input data, binary file formats, tensor shapes,
non-finite numbers, configuration, and output clobbering.
"""


class EngineError(Exception):
    """Base class for all errors raised by claimscreen."""


class CorpusError(EngineError):
    """Malformed corpus input (bad line, duplicate id, empty claims...)."""


class FormatError(EngineError):
    """Corrupt or mismatched binary file (CEMB embeddings, checkpoints)."""


class ShapeError(EngineError):
    """Tensor/matrix shape mismatch."""


class NonFiniteError(EngineError):
    """A NaN or Inf appeared where only finite values are allowed."""


class ConfigError(EngineError):
    """Invalid pipeline or model configuration."""


class OverwriteError(EngineError):
    """Refusing to overwrite an existing output without --force."""


class TrainingError(EngineError):
    """Training diverged or could not proceed."""
