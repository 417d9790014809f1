"""Trainable character-level translation model."""

from .config import ModelConfig
from .gradcheck import gradient_check, gradient_check_detailed
from .model import (
    EmptySource,
    EncoderStates,
    TrainingExample,
    TranslationModel,
    attention,
    decode_greedy,
    encode,
    expected_param_shapes,
    loss_and_gradients,
    multi_target_loss,
    new_model,
    parameter_checksum,
    sequence_loss,
    shape_audit,
)
from .modelio import (
    CorruptFile,
    IncompatibleVersion,
    ParallelCorpusError,
    load_model,
    read_parallel_corpus,
    save_model,
)
from .training import (
    EmptyDataset,
    EpochStats,
    TrainResult,
    exact_match_rate,
    mean_multi_target_loss,
    next_lr,
    train,
)
from .vocab import BOS, EOS, PAD, UNK, CharVocab

__all__ = [
    "BOS",
    "EOS",
    "PAD",
    "UNK",
    "CharVocab",
    "CorruptFile",
    "EmptyDataset",
    "EmptySource",
    "EncoderStates",
    "EpochStats",
    "IncompatibleVersion",
    "ModelConfig",
    "ParallelCorpusError",
    "TrainResult",
    "TrainingExample",
    "TranslationModel",
    "attention",
    "decode_greedy",
    "encode",
    "exact_match_rate",
    "expected_param_shapes",
    "gradient_check",
    "gradient_check_detailed",
    "load_model",
    "loss_and_gradients",
    "mean_multi_target_loss",
    "multi_target_loss",
    "new_model",
    "next_lr",
    "parameter_checksum",
    "read_parallel_corpus",
    "save_model",
    "sequence_loss",
    "shape_audit",
    "train",
]
