"""Readers and writers for the pipeline's on-disk artifacts.

Formats are line-oriented JSON with fixed key order and compact
separators, so re-running a step on identical input reproduces
byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

from .clustering import Cluster, MatchingRule, generate_rule
from .domains import PublicSuffixSnapshot, parse_fqdn
from .errors import MalformedRecord, PipelineError
from .ingest import IngestRecord, record_from_line


def write_clusters(path: str | Path, clusters) -> None:
    """One line per cluster: {"cluster_id":<int>,"members":[...]}."""
    with open(path, "w") as handle:
        for cluster in clusters:
            members = json.dumps(
                [m.fqdn for m in cluster.members], separators=(",", ":")
            )
            handle.write(
                f'{{"cluster_id":{cluster.cluster_id},"members":{members}}}\n'
            )


def read_clusters(path: str | Path, psl: PublicSuffixSnapshot,
                  rules: dict[int, MatchingRule] | None = None) -> list[Cluster]:
    """Load a clusters file; when a rules map is given, attach each
    cluster's rule, otherwise regenerate rules from the members."""
    clusters: list[Cluster] = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            try:
                fields = json.loads(line)
                cluster_id = int(fields["cluster_id"])
                members = tuple(parse_fqdn(m, psl) for m in fields["members"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(f"bad cluster line: {exc}") from None
            except PipelineError as exc:
                raise MalformedRecord(f"bad cluster member: {exc}") from None
            rule = rules.get(cluster_id) if rules is not None else generate_rule(members)
            clusters.append(Cluster(cluster_id=cluster_id, members=members, rule=rule))
    return clusters


def write_rules(path: str | Path, clusters) -> None:
    """Single JSON array; clusters without a rule contribute no entry."""
    entries = []
    for cluster in clusters:
        if cluster.rule is None:
            continue
        body = cluster.rule.to_json()[1:-1]  # reuse the rule's fixed key order
        prefix = f'{{"cluster_id":{cluster.cluster_id}'
        entries.append(prefix + ("," + body if body else "") + "}")
    with open(path, "w") as handle:
        handle.write("[" + ",".join(entries) + "]\n")


def read_rules(path: str | Path) -> dict[int, MatchingRule]:
    with open(path) as handle:
        try:
            entries = json.load(handle)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"bad rules file: {exc}") from None
    if not isinstance(entries, list):
        raise MalformedRecord("rules file must hold a JSON array")
    rules: dict[int, MatchingRule] = {}
    for entry in entries:
        try:
            cluster_id = int(entry["cluster_id"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(f"bad rule entry: {exc}") from None
        num = entry.get("num")
        rules[cluster_id] = MatchingRule(
            tld=entry.get("tld"),
            e2ld=entry.get("e2ld"),
            num=int(num) if num is not None else None,
        )
    return rules


def write_detections(path: str | Path, results) -> dict:
    """Stream detection lines to disk, returning counts by verdict."""
    counts: dict[str, int] = {}
    with open(path, "w") as handle:
        for result in results:
            handle.write(result.to_json_line() + "\n")
            key = result.verdict.value
            counts[key] = counts.get(key, 0) + 1
    return counts


def load_ingest_file(path: str | Path, psl: PublicSuffixSnapshot,
                     stats: dict | None = None) -> list[IngestRecord]:
    """Read IngestRecord lines, skipping and counting malformed ones."""
    records: list[IngestRecord] = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            try:
                records.append(record_from_line(line, psl))
            except MalformedRecord:
                if stats is not None:
                    stats["malformed_records"] = stats.get("malformed_records", 0) + 1
    return records
