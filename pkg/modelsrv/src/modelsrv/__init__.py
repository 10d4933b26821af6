"""Reference fill-mask backend: a small trainable masked language model
served over the probing wire protocol, plus the subject-disjoint split
and vocabulary-extension fine-tuning procedures."""

from .model import ModelConfig, TinyMaskedLM, fresh_model
from .server import ModelServer
from .train import (
    MaskedFact,
    TrainSplit,
    VocabExtension,
    extend_vocab_and_fine_tune,
    make_split,
    plan_extension,
    read_benchmark,
)
from .vocab import WordPieceVocab

__all__ = [
    "MaskedFact",
    "ModelConfig",
    "ModelServer",
    "TinyMaskedLM",
    "TrainSplit",
    "VocabExtension",
    "WordPieceVocab",
    "extend_vocab_and_fine_tune",
    "fresh_model",
    "make_split",
    "plan_extension",
    "read_benchmark",
]
