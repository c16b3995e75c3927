"""Triplet-loss fine-tuning over cosine distance.

The objective per triplet is relu(cos(a, n) - cos(a, p) + margin):
pushing the anchor-negative similarity below the anchor-positive
similarity by at least the margin.  Per-epoch mean losses are recorded
and written as a TSV metrics file next to the model artifact.
"""
from __future__ import annotations

import math
from pathlib import Path

import torch
from transformers import BertModel, PreTrainedTokenizerFast

from .errors import InsufficientData, TrainingDiverged
from .model import TrainerConfig, embed_batch_t
from .triplets import Triplet


def _batch_loss(
    model: BertModel,
    tokenizer: PreTrainedTokenizerFast,
    batch: list[Triplet],
    margin: float,
) -> torch.Tensor:
    names = [t.anchor for t in batch] + [t.positive for t in batch] + [t.negative for t in batch]
    units = embed_batch_t(model, tokenizer, names)
    n = len(batch)
    anchors, positives, negatives = units[:n], units[n:2 * n], units[2 * n:]
    cos_pos = (anchors * positives).sum(dim=1)
    cos_neg = (anchors * negatives).sum(dim=1)
    return torch.relu(cos_neg - cos_pos + margin).mean()


def train(
    model: BertModel,
    tokenizer: PreTrainedTokenizerFast,
    triplets: list[Triplet],
    config: TrainerConfig,
) -> list[float]:
    """Train in place; returns the mean loss of each epoch."""
    if not triplets:
        raise InsufficientData("no triplets to train on")
    torch.manual_seed(config.seed)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    losses: list[float] = []
    model.train()
    for _ in range(config.epochs):
        total, batches = 0.0, 0
        for start in range(0, len(triplets), config.batch_size):
            batch = triplets[start:start + config.batch_size]
            optimizer.zero_grad()
            loss = _batch_loss(model, tokenizer, batch, config.margin)
            value = float(loss.detach())
            if not math.isfinite(value):
                raise TrainingDiverged(f"loss became {value}")
            loss.backward()
            optimizer.step()
            total += value
            batches += 1
        losses.append(total / batches)
    return losses


def margin_stats(
    model: BertModel,
    tokenizer: PreTrainedTokenizerFast,
    triplets: list[Triplet],
    batch_size: int = 128,
) -> tuple[float, float]:
    """Mean cos(anchor, positive) and mean cos(anchor, negative)."""
    if not triplets:
        raise InsufficientData("no triplets to evaluate")
    model.eval()
    pos_total, neg_total = 0.0, 0.0
    with torch.no_grad():
        for start in range(0, len(triplets), batch_size):
            batch = triplets[start:start + batch_size]
            names = ([t.anchor for t in batch] + [t.positive for t in batch]
                     + [t.negative for t in batch])
            units = embed_batch_t(model, tokenizer, names)
            n = len(batch)
            anchors, positives, negatives = units[:n], units[n:2 * n], units[2 * n:]
            pos_total += float((anchors * positives).sum(dim=1).sum())
            neg_total += float((anchors * negatives).sum(dim=1).sum())
    return pos_total / len(triplets), neg_total / len(triplets)


def write_metrics(path: str | Path, losses: list[float]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch\tloss\n")
        for epoch, loss in enumerate(losses, start=1):
            fh.write(f"{epoch}\t{loss:.6f}\n")
