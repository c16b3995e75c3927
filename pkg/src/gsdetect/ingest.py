"""Deduplicated first-seen domain streams from CT logs, zone snapshots,
passive DNS, and threat-intel feeds.

Every source funnels into :class:`IngestRecord` lines.  A persistent
:class:`SeenSet` suppresses re-observations (certificate renewals,
repeat DNS answers) so downstream steps only see each FQDN once.
"""

from __future__ import annotations

import enum
import json
import sqlite3
import time
import warnings
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from urllib.parse import urlsplit

from .domains import DomainName, PublicSuffixSnapshot, normalize_raw, parse_fqdn
from .errors import ConfigError, MalformedRecord, PipelineError, UnsortedInput


class Source(enum.Enum):
    CT = "ct"
    ZONE = "zone"
    PDNS = "pdns"
    TI = "ti"


@dataclass(frozen=True)
class IngestRecord:
    domain: DomainName
    source: Source
    first_seen: str | None = None
    ips: tuple[str, ...] | None = None
    brand: str | None = None
    wildcard: bool = False

    def to_json_line(self) -> str:
        fields = {
            "domain": self.domain.fqdn,
            "source": self.source.value,
            "first_seen": self.first_seen,
            "ips": list(self.ips) if self.ips is not None else None,
            "brand": self.brand,
            "wildcard": self.wildcard,
        }
        return json.dumps(fields, separators=(",", ":"))


def record_from_line(line: str, psl: PublicSuffixSnapshot) -> IngestRecord:
    try:
        fields = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"bad JSON: {exc}") from None
    if not isinstance(fields, dict) or "domain" not in fields:
        raise MalformedRecord("record must be an object with a domain field")
    try:
        domain = parse_fqdn(str(fields["domain"]), psl)
    except PipelineError as exc:
        raise MalformedRecord(str(exc)) from None
    try:
        source = Source(fields.get("source", "ti"))
    except ValueError:
        raise MalformedRecord(f"unknown source {fields.get('source')!r}") from None
    ips = fields.get("ips")
    return IngestRecord(
        domain=domain,
        source=source,
        first_seen=fields.get("first_seen"),
        ips=tuple(ips) if ips is not None else None,
        brand=fields.get("brand"),
        wildcard=bool(fields.get("wildcard", False)),
    )


def _parse_rfc3339(value: str) -> datetime:
    # Python 3.10 fromisoformat rejects a trailing Z
    return datetime.fromisoformat(value.replace("Z", "+00:00"))


# Bloom sizing for a false-positive rate <= 1e-6:
# bits per key m/n = -ln(p) / ln(2)^2 ~= 28.8, hash count k = ln(2) * m/n ~= 20.
_BLOOM_BITS_PER_KEY = 29
_BLOOM_HASHES = 20


class SeenSet:
    """Persistent set of observed FQDNs.

    The default backend is exact: a SQLite table keyed by FQDN, where
    INSERT OR IGNORE gives atomic check-and-insert, safe for a shared
    instance across ingest streams.  ``approximate=True`` swaps in a
    Bloom filter (never false-negative; false-positive rate <= 1e-6 at
    the configured capacity) for throughput far beyond desk scale.  An
    optional ``ttl_seconds`` lets entries expire; it requires the exact
    backend.
    """

    def __init__(
        self,
        path: str | Path,
        ttl_seconds: float | None = None,
        approximate: bool = False,
        capacity: int = 1_000_000,
    ) -> None:
        self.path = Path(path)
        self.ttl_seconds = ttl_seconds
        self.approximate = approximate
        if approximate:
            if ttl_seconds is not None:
                raise ConfigError("ttl_seconds requires the exact backend")
            self._bits = bytearray(self._load_bloom(capacity))
            self._conn = None
        else:
            self._conn = sqlite3.connect(self.path)
            self._conn.execute(
                "CREATE TABLE IF NOT EXISTS seen (fqdn TEXT PRIMARY KEY, ts REAL NOT NULL)"
            )
            self._conn.commit()

    def _load_bloom(self, capacity: int) -> bytes:
        size = max(1024, (capacity * _BLOOM_BITS_PER_KEY + 7) // 8)
        if self.path.exists() and self.path.stat().st_size > 0:
            return self.path.read_bytes()
        return bytes(size)

    @staticmethod
    def _bloom_slots(key: str, nbits: int):
        data = key.encode()
        h1 = 0xCBF29CE484222325
        for byte in data:
            h1 = ((h1 ^ byte) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
        # second independent hash via one splitmix64 scramble of h1
        z = (h1 + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
        h2 = (z ^ (z >> 27)) | 1
        for i in range(_BLOOM_HASHES):
            yield ((h1 + i * h2) & 0xFFFFFFFFFFFFFFFF) % nbits

    def check_and_insert(self, fqdn: str, ts: float | None = None) -> bool:
        """Insert ``fqdn``; return True when it was not already present."""
        if self.approximate:
            nbits = len(self._bits) * 8
            fresh = False
            for slot in self._bloom_slots(fqdn, nbits):
                byte, bit = divmod(slot, 8)
                if not self._bits[byte] & (1 << bit):
                    fresh = True
                    self._bits[byte] |= 1 << bit
            return fresh
        now = time.time() if ts is None else ts
        assert self._conn is not None
        if self.ttl_seconds is not None:
            self._conn.execute(
                "DELETE FROM seen WHERE ts < ?", (now - self.ttl_seconds,)
            )
        cursor = self._conn.execute(
            "INSERT OR IGNORE INTO seen (fqdn, ts) VALUES (?, ?)", (fqdn, now)
        )
        self._conn.commit()
        return cursor.rowcount == 1

    def contains(self, fqdn: str) -> bool:
        if self.approximate:
            nbits = len(self._bits) * 8
            return all(
                self._bits[slot // 8] & (1 << (slot % 8))
                for slot in self._bloom_slots(fqdn, nbits)
            )
        assert self._conn is not None
        row = self._conn.execute(
            "SELECT 1 FROM seen WHERE fqdn = ?", (fqdn,)
        ).fetchone()
        return row is not None

    def flush(self) -> None:
        if self.approximate:
            self.path.write_bytes(bytes(self._bits))
        else:
            assert self._conn is not None
            self._conn.commit()

    def close(self) -> None:
        self.flush()
        if self._conn is not None:
            self._conn.close()
            self._conn = None

    def __enter__(self) -> "SeenSet":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _count(stats: dict | None, key: str) -> None:
    if stats is not None:
        stats[key] = stats.get(key, 0) + 1


def _as_dict(record, stats: dict | None):
    if isinstance(record, dict):
        return record
    try:
        parsed = json.loads(record)
    except json.JSONDecodeError:
        _count(stats, "malformed_records")
        warnings.warn(f"skipping unparseable record: {record[:80]!r}")
        return None
    if not isinstance(parsed, dict):
        _count(stats, "malformed_records")
        warnings.warn("skipping non-object record")
        return None
    return parsed


def ingest_ct(records, seen: SeenSet, psl: PublicSuffixSnapshot, stats: dict | None = None):
    """CT certificate records -> first-seen IngestRecords.

    Input lines carry {"ts","names"}.  Wildcard names are stripped and
    flagged; renewals (names already in the SeenSet) are suppressed.
    Malformed records and names are skipped and counted, never raised.
    """
    for raw in records:
        fields = _as_dict(raw, stats)
        if fields is None:
            continue
        ts = fields.get("ts")
        names = fields.get("names")
        if not isinstance(ts, str) or not isinstance(names, list):
            _count(stats, "malformed_records")
            warnings.warn("certificate record lacks ts/names")
            continue
        try:
            _parse_rfc3339(ts)
        except ValueError:
            _count(stats, "malformed_records")
            warnings.warn(f"bad timestamp {ts!r}")
            continue
        for raw_name in names:
            cleaned, wildcard = normalize_raw(str(raw_name))
            try:
                domain = parse_fqdn(cleaned, psl)
            except PipelineError:
                _count(stats, "malformed_names")
                warnings.warn(f"skipping unparseable name {raw_name!r}")
                continue
            if not seen.check_and_insert(domain.fqdn):
                _count(stats, "suppressed")
                continue
            _count(stats, "emitted")
            yield IngestRecord(
                domain=domain, source=Source.CT, first_seen=ts, wildcard=wildcard
            )


def diff_zone(today, yesterday):
    """Stream today's zone entries missing from yesterday's.

    Both inputs must be sorted, unique, lowercase e2LDs; violations
    raise UnsortedInput.  Runs as a sorted merge walk so 100k-line
    snapshots never load into memory at once.
    """
    def checked(lines, label):
        previous = None
        for line in lines:
            entry = line.strip()
            if not entry:
                continue
            if previous is not None and entry <= previous:
                raise UnsortedInput(
                    f"{label} is not sorted-unique: {entry!r} after {previous!r}"
                )
            previous = entry
            yield entry

    new = checked(today, "today")
    old = checked(yesterday, "yesterday")
    pending_old = next(old, None)
    for entry in new:
        while pending_old is not None and pending_old < entry:
            pending_old = next(old, None)
        if pending_old == entry:
            continue
        yield entry
    # drain to validate yesterday's ordering even past today's last entry
    for _ in old:
        pass


def ingest_pdns(observations, seen: SeenSet, psl: PublicSuffixSnapshot,
                stats: dict | None = None):
    """Passive-DNS observations -> first-seen IngestRecords.

    Input lines carry {"ts","domain","ip"}.  Only the first observation
    of an FQDN emits; the record carries that observation's IP and
    timestamp.  Interleaving across time-ordered partitions can change
    which partition wins, but never the emitted domain set.
    """
    for raw in observations:
        fields = _as_dict(raw, stats)
        if fields is None:
            continue
        ts = fields.get("ts")
        ip = fields.get("ip")
        if not isinstance(ts, str) or not isinstance(fields.get("domain"), str):
            _count(stats, "malformed_records")
            warnings.warn("pdns record lacks ts/domain")
            continue
        try:
            _parse_rfc3339(ts)
            domain = parse_fqdn(fields["domain"], psl)
        except (ValueError, PipelineError) as exc:
            _count(stats, "malformed_records")
            warnings.warn(f"skipping pdns record: {exc}")
            continue
        if not seen.check_and_insert(domain.fqdn):
            _count(stats, "suppressed")
            continue
        _count(stats, "emitted")
        yield IngestRecord(
            domain=domain,
            source=Source.PDNS,
            first_seen=ts,
            ips=(str(ip),) if ip is not None else None,
        )


def _defang_url(text: str) -> str:
    return (
        text.replace("hxxps://", "https://")
        .replace("hxxp://", "http://")
        .replace("[.]", ".")
        .replace("[:]", ":")
    )


def load_ti(lines, psl: PublicSuffixSnapshot, stats: dict | None = None) -> list[IngestRecord]:
    """Threat-intel feed lines -> IngestRecords.

    Each line is a URL or bare domain, possibly defanged, with an
    optional tab-separated brand label.  Duplicates collapse to the
    earliest occurrence.  Junk lines are skipped and counted.
    """
    out: list[IngestRecord] = []
    seen_fqdns: set[str] = set()
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        target, _, brand = line.partition("\t")
        brand = brand.strip() or None
        target = _defang_url(target.strip())
        if "://" in target:
            host = urlsplit(target).hostname
            if not host:
                _count(stats, "malformed_records")
                warnings.warn(f"skipping URL without host: {line[:80]!r}")
                continue
            target = host
        try:
            domain = parse_fqdn(target, psl)
        except PipelineError as exc:
            _count(stats, "malformed_records")
            warnings.warn(f"skipping TI line: {exc}")
            continue
        if domain.fqdn in seen_fqdns:
            _count(stats, "suppressed")
            continue
        seen_fqdns.add(domain.fqdn)
        _count(stats, "emitted")
        out.append(IngestRecord(domain=domain, source=Source.TI, brand=brand))
    return out
