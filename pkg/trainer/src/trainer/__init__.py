"""Domain-name encoder trainer.

Builds triplet datasets from squatting clusters and a benign pool,
fine-tunes a small from-scratch transformer encoder with triplet loss
after augmenting its tokenizer with TLD and brand tokens, and exports
embedding files the detection pipeline consumes directly.
"""

from .errors import InsufficientData, ModelLoadFailure, TrainerError, TrainingDiverged
from .export import export_embeddings
from .model import (
    TrainerConfig,
    augment_vocabulary,
    base_vocab,
    build_model,
    build_tokenizer,
    encode,
    load_model,
    save_model,
)
from .train import margin_stats, train, write_metrics
from .triplets import (
    SplitMix64,
    Triplet,
    build_triplets,
    load_clusters,
    load_domains,
    read_triplets,
    write_triplets,
)

__all__ = [
    "InsufficientData",
    "ModelLoadFailure",
    "TrainerError",
    "TrainingDiverged",
    "TrainerConfig",
    "SplitMix64",
    "Triplet",
    "augment_vocabulary",
    "base_vocab",
    "build_model",
    "build_tokenizer",
    "build_triplets",
    "encode",
    "export_embeddings",
    "load_clusters",
    "load_domains",
    "load_model",
    "margin_stats",
    "read_triplets",
    "save_model",
    "train",
    "write_metrics",
    "write_triplets",
]

__version__ = "0.1.0"
