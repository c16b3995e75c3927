"""Tokenizer and encoder construction.

The encoder is a small transformer trained from scratch: a WordPiece
tokenizer over characters plus punctuation (so any domain name
tokenizes without unknowns), augmented with whole TLD and brand tokens,
feeding a compact BERT-style network whose mean-pooled final states are
L2-normalized into sentence embeddings.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from tokenizers import Tokenizer, models, normalizers, pre_tokenizers
from transformers import BertConfig, BertModel, PreTrainedTokenizerFast

from .errors import ModelLoadFailure

_SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]"]


@dataclass(frozen=True)
class TrainerConfig:
    hidden_size: int = 64
    num_layers: int = 2
    num_heads: int = 4
    intermediate_size: int = 128
    max_len: int = 128
    margin: float = 0.5
    epochs: int = 2
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 0
    holdout: int = 100


def base_vocab() -> list[str]:
    """Characters, digits, and separators; every domain name tokenizes
    to known pieces before any augmentation."""
    chars = "abcdefghijklmnopqrstuvwxyz0123456789"
    vocab = list(_SPECIALS) + [".", "-", "_"]
    vocab.extend(chars)
    vocab.extend("##" + c for c in chars)
    return vocab


def build_tokenizer() -> PreTrainedTokenizerFast:
    vocab = {token: i for i, token in enumerate(base_vocab())}
    backend = Tokenizer(models.WordPiece(vocab, unk_token="[UNK]"))
    backend.normalizer = normalizers.BertNormalizer(lowercase=True)
    backend.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    return PreTrainedTokenizerFast(
        tokenizer_object=backend,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
    )


def augment_vocabulary(
    tokenizer: PreTrainedTokenizerFast,
    tlds: list[str],
    brands: list[str],
) -> int:
    """Add TLD and brand strings as whole tokens; returns the number of
    unique tokens actually added.

    TLDs may carry a leading dot and internal dots (".co.uk"); they are
    split into label tokens because the pre-tokenizer always separates
    dots.  Everything is lowercased before adding.
    """
    tokens: list[str] = []
    for tld in tlds:
        tokens.extend(label for label in tld.lower().strip(".").split(".") if label)
    tokens.extend(brand.lower() for brand in brands)
    unique = list(dict.fromkeys(tokens))
    return tokenizer.add_tokens(unique)


def build_model(tokenizer: PreTrainedTokenizerFast, config: TrainerConfig) -> BertModel:
    torch.manual_seed(config.seed)
    bert_config = BertConfig(
        vocab_size=len(tokenizer),
        hidden_size=config.hidden_size,
        num_hidden_layers=config.num_layers,
        num_attention_heads=config.num_heads,
        intermediate_size=config.intermediate_size,
        max_position_embeddings=config.max_len,
        pad_token_id=tokenizer.pad_token_id,
    )
    return BertModel(bert_config)


def _mean_pool(hidden: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    mask = mask.unsqueeze(-1).to(hidden.dtype)
    summed = (hidden * mask).sum(dim=1)
    counts = mask.sum(dim=1).clamp(min=1.0)
    pooled = summed / counts
    return torch.nn.functional.normalize(pooled, dim=1)


def embed_batch_t(
    model: BertModel,
    tokenizer: PreTrainedTokenizerFast,
    names: list[str],
) -> torch.Tensor:
    """Differentiable unit embeddings for a batch of names."""
    enc = tokenizer(
        names,
        padding=True,
        truncation=True,
        max_length=model.config.max_position_embeddings,
        return_tensors="pt",
    )
    hidden = model(**enc).last_hidden_state
    return _mean_pool(hidden, enc["attention_mask"])


def encode(
    model: BertModel,
    tokenizer: PreTrainedTokenizerFast,
    names: list[str],
    batch_size: int = 128,
) -> np.ndarray:
    """Unit embeddings for inference, batched under no_grad."""
    model.eval()
    rows = []
    with torch.no_grad():
        for start in range(0, len(names), batch_size):
            chunk = names[start:start + batch_size]
            rows.append(embed_batch_t(model, tokenizer, chunk).numpy())
    if not rows:
        return np.zeros((0, model.config.hidden_size))
    return np.concatenate(rows, axis=0)


def save_model(path: str | Path, model: BertModel,
               tokenizer: PreTrainedTokenizerFast) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(path)
    tokenizer.save_pretrained(path)


def load_model(path: str | Path) -> tuple[BertModel, PreTrainedTokenizerFast]:
    path = Path(path)
    if not path.is_dir():
        raise ModelLoadFailure(f"model directory not found: {path}")
    try:
        model = BertModel.from_pretrained(path, local_files_only=True)
        tokenizer = PreTrainedTokenizerFast.from_pretrained(path, local_files_only=True)
    except Exception as exc:
        raise ModelLoadFailure(f"cannot load model from {path}: {exc}") from exc
    return model, tokenizer
