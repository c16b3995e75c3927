"""Embedding-file export.

Writes the precomputed-embedding format the detection pipeline reads:
a header line with the dimension and model name, then one JSON record
per domain with an L2-normalized vector.
"""
from __future__ import annotations

import json
from pathlib import Path

from transformers import BertModel, PreTrainedTokenizerFast

from .model import encode

MODEL_NAME = "gsd-trainer-v1"


def export_embeddings(
    model: BertModel,
    tokenizer: PreTrainedTokenizerFast,
    domains: list[str],
    out_path: str | Path,
    batch_size: int = 128,
) -> int:
    """Embed the domains and write the file; returns the record count."""
    vectors = encode(model, tokenizer, domains, batch_size=batch_size)
    with open(out_path, "w", encoding="utf-8") as fh:
        header = {"dim": int(model.config.hidden_size), "model": MODEL_NAME}
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for domain, vec in zip(domains, vectors):
            record = {"domain": domain, "vec": [float(x) for x in vec]}
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")
    return len(domains)
