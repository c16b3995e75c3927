"""Step 1: cluster known phishing domain names and derive matching rules.

DBSCAN runs over cosine distance (1 - cosine similarity) with the
neighborhood including the point itself.  The traversal is pinned for
determinism: points are visited in input order and a border point joins
the first cluster whose expansion reaches it.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from .domains import DomainName
from .errors import EmptyInput
from .prefilter import filter_domain

NOISE = -1

_UNSET = -2


@dataclass(frozen=True)
class MatchingRule:
    """Per-cluster constraints: shared TLD, shared e2LD, or shared FQDN
    character count (dots included)."""

    tld: str | None = None
    e2ld: str | None = None
    num: int | None = None

    def fields(self) -> dict:
        # fixed key order keeps serialized rules byte-stable
        out: dict = {}
        if self.tld is not None:
            out["tld"] = self.tld
        if self.e2ld is not None:
            out["e2ld"] = self.e2ld
        if self.num is not None:
            out["num"] = self.num
        return out

    def to_json(self) -> str:
        return json.dumps(self.fields(), separators=(",", ":"))

    def matches(self, name: DomainName) -> bool:
        if self.tld is not None and name.tld != self.tld:
            return False
        if self.e2ld is not None and name.e2ld != self.e2ld:
            return False
        if self.num is not None and len(name.fqdn) != self.num:
            return False
        return True


@dataclass(frozen=True)
class Cluster:
    cluster_id: int
    members: tuple[DomainName, ...]
    rule: MatchingRule | None


def _neighbor_lists(vectors: np.ndarray, eps: float, block: int = 1024) -> list[np.ndarray]:
    """eps-neighborhoods (self included) from cosine distance, computed in
    row blocks so the full n x n matrix never materializes."""
    threshold = 1.0 - eps
    n = vectors.shape[0]
    neighbors: list[np.ndarray] = []
    for start in range(0, n, block):
        sims = vectors[start:start + block] @ vectors.T
        for row in sims:
            neighbors.append(np.nonzero(row >= threshold)[0])
    return neighbors


def dbscan(vectors: np.ndarray | list, eps: float, min_pts: int) -> list[int]:
    """Density clustering with deterministic labels.

    Returns one label per input point: cluster ids 0..C-1 in discovery
    order, or NOISE (-1).  A point is core iff its eps-neighborhood,
    itself included, holds at least ``min_pts`` points.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.size == 0:
        raise EmptyInput("dbscan requires at least one vector")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if min_pts < 2:
        raise ValueError(f"min_pts must be >= 2, got {min_pts}")
    neighbors = _neighbor_lists(vectors, eps)
    n = vectors.shape[0]
    labels = [_UNSET] * n
    cluster_id = 0
    for p in range(n):
        if labels[p] != _UNSET:
            continue
        seed = neighbors[p]
        if len(seed) < min_pts:
            labels[p] = NOISE
            continue
        labels[p] = cluster_id
        queue: deque[int] = deque(int(q) for q in seed if q != p)
        while queue:
            q = queue.popleft()
            if labels[q] == NOISE:
                labels[q] = cluster_id  # border point, reached first here
            if labels[q] != _UNSET:
                continue
            labels[q] = cluster_id
            reach = neighbors[q]
            if len(reach) >= min_pts:
                queue.extend(int(r) for r in reach)
        cluster_id += 1
    return labels


def generate_rule(members: tuple[DomainName, ...] | list[DomainName]) -> MatchingRule | None:
    """Emit the constraints every member shares, or None when nothing is
    shared.  Character counts include dots ("example000.test" -> 15)."""
    tlds = {m.tld for m in members}
    e2lds = {m.e2ld for m in members}
    lengths = {len(m.fqdn) for m in members}
    rule = MatchingRule(
        tld=next(iter(tlds)) if len(tlds) == 1 else None,
        e2ld=next(iter(e2lds)) if len(e2lds) == 1 else None,
        num=next(iter(lengths)) if len(lengths) == 1 else None,
    )
    if rule.tld is None and rule.e2ld is None and rule.num is None:
        return None
    return rule


@dataclass(frozen=True)
class Step1Result:
    clusters: tuple[Cluster, ...]
    reference_domains: tuple[DomainName, ...]
    reference_vectors: np.ndarray
    stats: dict


def run_step1(ti_records, embedder, eps: float = 0.04, min_pts: int = 3) -> Step1Result:
    """Filter, deduplicate, embed, and cluster a threat-intel snapshot.

    Noise points are dropped from the reference set; the reference
    ordering follows cluster ids, then member order within a cluster.
    """
    names = [record.domain for record in ti_records]
    kept = [n for n in names if filter_domain(n).keep]
    unique: dict[str, DomainName] = {}
    for name in kept:
        unique.setdefault(name.fqdn, name)
    deduped = list(unique.values())
    if not deduped:
        raise EmptyInput("no domains left after filtering")
    vectors = embedder.embed_batch([n.fqdn for n in deduped])
    labels = dbscan(vectors, eps, min_pts)
    grouped: dict[int, list[int]] = {}
    for idx, label in enumerate(labels):
        if label != NOISE:
            grouped.setdefault(label, []).append(idx)
    clusters = []
    ref_domains: list[DomainName] = []
    ref_rows: list[int] = []
    for cluster_id in sorted(grouped):
        member_idx = grouped[cluster_id]
        members = tuple(deduped[i] for i in member_idx)
        clusters.append(Cluster(cluster_id=cluster_id, members=members,
                                rule=generate_rule(members)))
        ref_domains.extend(members)
        ref_rows.extend(member_idx)
    stats = {
        "input": len(names),
        "kept_after_filter": len(kept),
        "unique": len(deduped),
        "clustered": len(ref_rows),
        "noise": len(deduped) - len(ref_rows),
        "clusters": len(clusters),
    }
    ref_vectors = vectors[ref_rows] if ref_rows else np.zeros((0, vectors.shape[1]))
    return Step1Result(
        clusters=tuple(clusters),
        reference_domains=tuple(ref_domains),
        reference_vectors=ref_vectors,
        stats=stats,
    )
