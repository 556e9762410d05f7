"""Desk-scale demonstration of in-context molecule tuning loss masks."""

__version__ = "0.1.0"

from .data import CorpusSpec, generate_corpus
from .evaluate import EvalResult, eval_toy, load_gold_targets
from .model import TinyCausalLM
from .records import PromptRecord, Vocab, load_records
from .training import ToyTrainConfig, TrainResult, train_toy

__all__ = [
    "CorpusSpec",
    "EvalResult",
    "PromptRecord",
    "TinyCausalLM",
    "ToyTrainConfig",
    "TrainResult",
    "Vocab",
    "eval_toy",
    "generate_corpus",
    "load_gold_targets",
    "load_records",
    "train_toy",
]
