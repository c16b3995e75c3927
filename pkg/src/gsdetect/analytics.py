"""Cluster analytics and evaluation machinery: edit distances, campaign
duration, IP sharing, brand aggregation, the manual-labeling guideline
matcher, and the eps sweep."""

from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import dataclass
from datetime import datetime

from .clustering import NOISE, dbscan
from .domains import DomainName
from .errors import DegenerateLabels, MissingFirstSeen, SetTooSmall

_SECONDS_PER_DAY = 86_400


def damerau_levenshtein(a: str, b: str) -> int:
    """Optimal-string-alignment edit distance: unit-cost insertions,
    deletions, substitutions, and adjacent transpositions, with no
    substring edited twice.  (Differs from unrestricted Damerau on
    inputs like ("ca", "abc"), where OSA gives 3.)
    """
    if a == b:
        return 0
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev2 = [0] * (lb + 1)
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        current = [i] + [0] * lb
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            current[j] = min(
                prev[j] + 1,          # deletion
                current[j - 1] + 1,   # insertion
                prev[j - 1] + cost,   # substitution
            )
            if (
                i > 1 and j > 1
                and a[i - 1] == b[j - 2]
                and a[i - 2] == b[j - 1]
            ):
                current[j] = min(current[j], prev2[j - 2] + 1)
        prev2, prev = prev, current
    return prev[lb]


@dataclass(frozen=True)
class ClusterReport:
    cluster_id: int
    size: int
    duration_days: int
    avg_edit_distance: float
    distinct_ips: int
    brands: dict
    missing_ips: bool

    def to_json_line(self) -> str:
        fields = {
            "cluster_id": self.cluster_id,
            "size": self.size,
            "duration_days": self.duration_days,
            "avg_edit_distance": round(self.avg_edit_distance, 6),
            "distinct_ips": self.distinct_ips,
            "brands": dict(sorted(self.brands.items())),
            "missing_ips": self.missing_ips,
        }
        return json.dumps(fields, separators=(",", ":"))


def _parse_ts(value: str) -> datetime:
    return datetime.fromisoformat(value.replace("Z", "+00:00"))


def analyze_clusters(
    clusters,
    first_seen: dict[str, str],
    a_records: dict[str, list[str]] | None = None,
    brand_labels: dict[str, str] | None = None,
) -> list[ClusterReport]:
    """Summarize each cluster: campaign duration in whole days (floor),
    mean pairwise edit distance over member FQDNs, distinct IPs across
    members, and the multiset of brand labels.

    A cluster whose members lack first-seen timestamps is skipped with a
    warning; a cluster with no A records reports distinct_ips 0 and is
    flagged via missing_ips.
    """
    a_records = a_records or {}
    brand_labels = brand_labels or {}
    reports: list[ClusterReport] = []
    for cluster in clusters:
        fqdns = [m.fqdn for m in cluster.members]
        try:
            stamps = []
            for fqdn in fqdns:
                if fqdn not in first_seen:
                    raise MissingFirstSeen(f"{fqdn} has no first-seen timestamp")
                stamps.append(_parse_ts(first_seen[fqdn]))
        except MissingFirstSeen as exc:
            warnings.warn(f"skipping cluster {cluster.cluster_id}: {exc}")
            continue
        span = max(stamps) - min(stamps)
        duration_days = int(span.total_seconds() // _SECONDS_PER_DAY)
        total = 0
        pairs = 0
        for i in range(len(fqdns)):
            for j in range(i + 1, len(fqdns)):
                total += damerau_levenshtein(fqdns[i], fqdns[j])
                pairs += 1
        ips = {ip for fqdn in fqdns for ip in a_records.get(fqdn, [])}
        brands = Counter(
            brand_labels[f] for f in fqdns if brand_labels.get(f) is not None
        )
        reports.append(
            ClusterReport(
                cluster_id=cluster.cluster_id,
                size=len(fqdns),
                duration_days=duration_days,
                avg_edit_distance=total / pairs if pairs else 0.0,
                distinct_ips=len(ips),
                brands=dict(brands),
                missing_ips=not ips,
            )
        )
    return reports


@dataclass(frozen=True)
class SweepRow:
    eps: float
    precision: float
    recall: float
    accuracy: float


def eval_sweep(labeled, embedder, eps_values, min_pts: int = 3) -> list[SweepRow]:
    """Cluster the labeled corpus at each eps and score "clustered"
    as the positive prediction.

    Embeddings are computed once and reused across the grid.  When
    nothing is clustered at some eps, precision is reported as 1.0
    (no false positives were produced).
    """
    labeled = list(labeled)
    positives = sum(1 for _, is_gsd in labeled if is_gsd)
    if positives == 0 or positives == len(labeled):
        raise DegenerateLabels("labels must contain both classes")
    eps_values = list(eps_values)
    if eps_values != sorted(eps_values):
        raise ValueError("eps_values must be ascending")
    vectors = embedder.embed_batch([d.fqdn for d, _ in labeled])
    rows: list[SweepRow] = []
    for eps in eps_values:
        labels = dbscan(vectors, eps, min_pts)
        tp = fp = tn = fn = 0
        for label, (_, is_gsd) in zip(labels, labeled):
            predicted = label != NOISE
            if predicted and is_gsd:
                tp += 1
            elif predicted:
                fp += 1
            elif is_gsd:
                fn += 1
            else:
                tn += 1
        precision = tp / (tp + fp) if tp + fp else 1.0
        rows.append(
            SweepRow(
                eps=eps,
                precision=precision,
                recall=tp / (tp + fn),
                accuracy=(tp + tn) / len(labeled),
            )
        )
    return rows


def sweep_to_tsv(rows: list[SweepRow]) -> str:
    lines = ["eps\tprecision\trecall\taccuracy"]
    for row in rows:
        lines.append(
            f"{row.eps:g}\t{row.precision:.6f}\t{row.recall:.6f}\t{row.accuracy:.6f}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GuidelineResult:
    matched: bool
    conditions: tuple[bool, bool, bool, bool]


def _brand_evidence(name: DomainName, brands, substring_min: int, edit_max: int) -> bool:
    fqdn = name.fqdn
    for brand in brands:
        if brand in fqdn:
            return True
        # any >= substring_min-char window of the brand counts; checking
        # windows of exactly substring_min chars is equivalent
        for i in range(len(brand) - substring_min + 1):
            if brand[i:i + substring_min] in fqdn:
                return True
        for label in name.labels:
            if damerau_levenshtein(label, brand) <= edit_max:
                return True
    return False


def guideline_match(
    domains,
    brands,
    substring_min: int = 4,
    edit_max: int = 2,
) -> GuidelineResult:
    """Apply the four manual-labeling conditions to a candidate group.

    1. Every member shows brand evidence: contains a brand, contains a
       >= substring_min-char piece of a brand, or has a label within
       edit distance edit_max of a brand.
    2. Lengths agree: max spread of len(fqdn minus TLD) and of the
       subdomain part is below 3.
    3. If any member has more than 2 subdomain labels, all members have
       the same subdomain-label count.
    4. Dots and hyphens sit at identical offsets (counted on the fqdn
       with the TLD removed) across all members.
    """
    domains = list(domains)
    if len(domains) < 3:
        raise SetTooSmall(f"guideline matching needs >= 3 domains, got {len(domains)}")
    brands = [b.lower() for b in brands]

    cond1 = all(_brand_evidence(d, brands, substring_min, edit_max) for d in domains)

    stems = [d.fqdn[: len(d.fqdn) - len(d.tld)] for d in domains]
    sub_parts = [".".join(d.subdomain_labels) for d in domains]
    stem_spread = max(len(s) for s in stems) - min(len(s) for s in stems)
    sub_spread = max(len(s) for s in sub_parts) - min(len(s) for s in sub_parts)
    cond2 = stem_spread < 3 and sub_spread < 3

    sub_counts = [len(d.subdomain_labels) for d in domains]
    cond3 = len(set(sub_counts)) == 1 if max(sub_counts) > 2 else True

    signatures = {
        tuple((i, c) for i, c in enumerate(stem) if c in ".-") for stem in stems
    }
    cond4 = len(signatures) == 1

    conditions = (cond1, cond2, cond3, cond4)
    return GuidelineResult(matched=all(conditions), conditions=conditions)
