"""Step 2: score new domains against the clustered reference set.

A query embedding is compared with every reference embedding (cosine
similarity, computed as a plain inner product over unit-length inputs).
References scoring at least ``t`` are matches; fewer than ``k`` matches
means NOT_SIMILAR.  Otherwise the rule of the cluster owning the single
most similar reference decides between GSD and REJECTED_BY_RULE.

Three search modes:

- EXACT scans every reference.
- ANN_VERIFIED partitions references (deterministic spherical k-means)
  and prunes partitions whose angular bound proves no member can reach
  ``t``; if any partition survives, a full exact scan runs, so verdicts
  and match sets are identical to EXACT by construction.
- ANN probes only the ``n_probe`` most similar partitions.  ``n_probe``
  is the recall knob: raising it trades speed for agreement with EXACT.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .clustering import Cluster, MatchingRule
from .domains import DomainName
from .errors import DimensionMismatch, EmptyReferenceSet
from .prefilter import filter_domain

# slack applied to the partition pruning bound so float error can only
# make pruning more conservative, never unsound
_BOUND_SLACK = 1e-6

_KMEANS_ITERATIONS = 8


class Mode(enum.Enum):
    EXACT = "exact"
    ANN_VERIFIED = "ann-verified"
    ANN = "ann"


class Verdict(enum.Enum):
    GSD = "gsd"
    REJECTED_BY_RULE = "rejected_by_rule"
    NOT_SIMILAR = "not_similar"


@dataclass(frozen=True)
class DetectionResult:
    domain: DomainName
    verdict: Verdict
    nearest_cluster: int | None
    matches: tuple[tuple[str, float], ...]

    def to_json_line(self) -> str:
        # similarity is fixed at 6 decimal places, so lines are built by
        # hand instead of json.dumps to keep the format byte-stable
        parts = [
            f'"domain":{json.dumps(self.domain.fqdn)}',
            f'"verdict":"{self.verdict.value}"',
            '"nearest_cluster":null' if self.nearest_cluster is None
            else f'"nearest_cluster":{self.nearest_cluster}',
        ]
        entries = ",".join(
            f'{{"domain":{json.dumps(d)},"sim":{s:.6f}}}' for d, s in self.matches
        )
        parts.append(f'"matches":[{entries}]')
        return "{" + ",".join(parts) + "}"


@dataclass(frozen=True)
class _Partitions:
    centroids: np.ndarray          # (K, dim), unit length
    radii: np.ndarray              # (K,), max angle centroid-to-member
    members: tuple[np.ndarray, ...]  # row indices per partition


@dataclass(frozen=True)
class ReferenceIndex:
    domains: tuple[str, ...]
    vectors: np.ndarray
    owner_cluster: np.ndarray
    rules: dict[int, MatchingRule | None]
    t: float
    k: int
    mode: Mode
    partitions: _Partitions | None = None
    n_probe: int = 4
    dim: int = field(default=0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "dim", int(self.vectors.shape[1]))


def _farthest_point_init(vectors: np.ndarray, count: int) -> np.ndarray:
    """Deterministic centroid seeding: start at row 0, then repeatedly
    take the row least similar to any chosen centroid (ties break to the
    lowest row index via argmin)."""
    chosen = [0]
    best_sim = vectors @ vectors[0]
    for _ in range(1, count):
        nxt = int(np.argmin(best_sim))
        chosen.append(nxt)
        best_sim = np.maximum(best_sim, vectors @ vectors[nxt])
    return vectors[chosen].copy()


def _build_partitions(vectors: np.ndarray) -> _Partitions:
    n = vectors.shape[0]
    count = max(1, min(n, math.isqrt(n) + (0 if math.isqrt(n) ** 2 == n else 1)))
    centroids = _farthest_point_init(vectors, count)
    assign = np.zeros(n, dtype=np.int64)
    for _ in range(_KMEANS_ITERATIONS):
        sims = vectors @ centroids.T
        assign = np.argmax(sims, axis=1)  # ties resolve to lowest index
        for j in range(count):
            rows = vectors[assign == j]
            if rows.shape[0] == 0:
                continue  # empty partition keeps its previous centroid
            mean = rows.sum(axis=0)
            norm = float(np.linalg.norm(mean))
            if norm > 0.0:
                centroids[j] = mean / norm
    members = tuple(np.nonzero(assign == j)[0] for j in range(count))
    radii = np.zeros(count, dtype=np.float64)
    for j in range(count):
        if members[j].size:
            sims = vectors[members[j]] @ centroids[j]
            radii[j] = float(np.arccos(np.clip(sims.min(), -1.0, 1.0)))
    return _Partitions(centroids=centroids, radii=radii, members=members)


def build_index(
    clusters: list[Cluster] | tuple[Cluster, ...],
    reference_embeddings: np.ndarray,
    t: float = 0.96,
    k: int = 2,
    mode: Mode = Mode.EXACT,
    n_probe: int = 4,
) -> ReferenceIndex:
    """Assemble the immutable reference index.

    ``reference_embeddings`` rows must line up with cluster members in
    cluster-id order and be unit length already; they are used as-is so
    stored similarities are exact inner products.
    """
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must be in (0, 1), got {t}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    vectors = np.asarray(reference_embeddings, dtype=np.float64)
    domains: list[str] = []
    owners: list[int] = []
    rules: dict[int, MatchingRule | None] = {}
    for cluster in clusters:
        rules[cluster.cluster_id] = cluster.rule
        for member in cluster.members:
            domains.append(member.fqdn)
            owners.append(cluster.cluster_id)
    if not domains or vectors.size == 0:
        raise EmptyReferenceSet("reference set is empty")
    if vectors.shape[0] != len(domains):
        raise ValueError(
            f"{vectors.shape[0]} embeddings for {len(domains)} cluster members"
        )
    partitions = _build_partitions(vectors) if mode is not Mode.EXACT else None
    return ReferenceIndex(
        domains=tuple(domains),
        vectors=vectors,
        owner_cluster=np.asarray(owners, dtype=np.int64),
        rules=rules,
        t=t,
        k=k,
        mode=mode,
        partitions=partitions,
        n_probe=n_probe,
    )


def _surviving_partitions(index: ReferenceIndex, u: np.ndarray) -> np.ndarray:
    """Partitions that could hold a similarity >= t, by the angular
    triangle inequality: member angle >= centroid angle - radius."""
    parts = index.partitions
    assert parts is not None
    centroid_sims = np.clip(parts.centroids @ u, -1.0, 1.0)
    angles = np.arccos(centroid_sims)
    bound = np.cos(np.maximum(0.0, angles - parts.radii))
    return np.nonzero(bound >= index.t - _BOUND_SLACK)[0]


def _result_from_rows(
    index: ReferenceIndex, domain: DomainName, rows: np.ndarray, sims: np.ndarray
) -> DetectionResult:
    order = sorted(range(len(rows)), key=lambda i: (-sims[i], index.domains[rows[i]]))
    matches = tuple((index.domains[rows[i]], float(sims[i])) for i in order)
    if not matches:
        return DetectionResult(domain, Verdict.NOT_SIMILAR, None, matches)
    top_row = int(rows[order[0]])
    nearest = int(index.owner_cluster[top_row])
    if len(matches) < index.k:
        return DetectionResult(domain, Verdict.NOT_SIMILAR, nearest, matches)
    rule = index.rules.get(nearest)
    if rule is not None and not rule.matches(domain):
        return DetectionResult(domain, Verdict.REJECTED_BY_RULE, nearest, matches)
    return DetectionResult(domain, Verdict.GSD, nearest, matches)


def _exact_rows(index: ReferenceIndex, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sims = index.vectors @ u
    rows = np.nonzero(sims >= index.t)[0]
    return rows, sims[rows]


def query(index: ReferenceIndex, u: np.ndarray, domain: DomainName) -> DetectionResult:
    """Score one embedding.  Matches are every reference with similarity
    >= t (boundary inclusive); the top match breaks similarity ties by
    lexicographically smallest reference domain."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (index.dim,):
        raise DimensionMismatch(
            f"query has shape {u.shape}, index dimension is {index.dim}"
        )
    if index.mode is Mode.EXACT:
        rows, sims = _exact_rows(index, u)
    elif index.mode is Mode.ANN_VERIFIED:
        if _surviving_partitions(index, u).size == 0:
            # the bound proves no reference reaches t
            return DetectionResult(domain, Verdict.NOT_SIMILAR, None, ())
        # every potentially positive query is resolved by an exact scan,
        # which is what makes verdicts identical to EXACT mode
        rows, sims = _exact_rows(index, u)
    else:
        parts = index.partitions
        assert parts is not None
        centroid_sims = parts.centroids @ u
        probe_order = np.argsort(-centroid_sims, kind="stable")
        probed = probe_order[: max(1, index.n_probe)]
        candidates = [parts.members[int(j)] for j in probed if parts.members[int(j)].size]
        if candidates:
            rows = np.concatenate(candidates)
            rows.sort()
            sims = index.vectors[rows] @ u
            keep = sims >= index.t
            rows, sims = rows[keep], sims[keep]
        else:
            rows = np.zeros(0, dtype=np.int64)
            sims = np.zeros(0, dtype=np.float64)
    return _result_from_rows(index, domain, rows, sims)


def run_step2(new_records, index: ReferenceIndex, embedder, batch: int = 512):
    """Filter, embed, and score a stream of ingest records, yielding one
    DetectionResult per kept domain in input order."""
    pending: list[DomainName] = []

    def flush():
        if not pending:
            return
        vectors = embedder.embed_batch([d.fqdn for d in pending])
        for row, name in enumerate(pending):
            yield query(index, vectors[row], name)
        pending.clear()

    for record in new_records:
        name = record.domain
        if not filter_domain(name).keep:
            continue
        pending.append(name)
        if len(pending) >= batch:
            yield from flush()
    yield from flush()
