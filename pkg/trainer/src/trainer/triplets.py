"""Triplet dataset construction.

Anchors and positives are distinct members of the same cluster,
sampled uniformly over all intra-cluster ordered pairs; negatives are
sampled uniformly from a benign pool disjoint from every cluster
member.  Sampling is deterministic per seed so triplet files are
byte-reproducible.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import InsufficientData

_MASK = (1 << 64) - 1


class SplitMix64:
    """Deterministic 64-bit generator, stable across Python versions."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        # rejection sampling keeps the draw unbiased
        limit = _MASK - (_MASK % n)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n


@dataclass(frozen=True)
class Triplet:
    anchor: str
    positive: str
    negative: str

    def to_json_line(self) -> str:
        return json.dumps(
            {"a": self.anchor, "p": self.positive, "n": self.negative},
            separators=(",", ":"),
        )


def build_triplets(
    clusters: list[list[str]], pool: list[str], count: int, seed: int
) -> list[Triplet]:
    if count < 1:
        raise InsufficientData(f"count must be >= 1, got {count}")
    members = {name for cluster in clusters for name in cluster}
    pairs: list[tuple[str, str]] = []
    for cluster in clusters:
        for anchor in cluster:
            for positive in cluster:
                if anchor != positive:
                    pairs.append((anchor, positive))
    if not pairs:
        raise InsufficientData("no cluster of size >= 2")
    negatives = [name for name in pool if name not in members]
    if len(negatives) < count:
        raise InsufficientData(
            f"benign pool has {len(negatives)} usable names, need >= {count}"
        )
    rng = SplitMix64(seed)
    out: list[Triplet] = []
    for _ in range(count):
        anchor, positive = pairs[rng.below(len(pairs))]
        out.append(Triplet(anchor, positive, negatives[rng.below(len(negatives))]))
    return out


def write_triplets(path: str | Path, triplets: list[Triplet]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for triplet in triplets:
            fh.write(triplet.to_json_line() + "\n")


def read_triplets(path: str | Path) -> list[Triplet]:
    out: list[Triplet] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            out.append(Triplet(record["a"], record["p"], record["n"]))
    return out


def load_clusters(path: str | Path) -> list[list[str]]:
    """Read the pipeline's cluster file: one JSON object per line with
    a ``members`` array."""
    clusters: list[list[str]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                clusters.append(list(json.loads(line)["members"]))
    return clusters


def load_domains(path: str | Path) -> list[str]:
    """Read one domain per line; JSON record lines contribute their
    ``domain`` field."""
    out: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("{"):
                out.append(json.loads(line)["domain"])
            else:
                out.append(line)
    return out
