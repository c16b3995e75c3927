"""Exclusion rules for domain names users cannot meaningfully squat with.

Hosting providers and resolvers mint huge volumes of machine-generated
names (UUID subdomains, embedded IPv4 addresses, short numeric IDs).
These are dropped before any embedding work.  Rules are evaluated in a
fixed order and exactly one reason is reported.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .domains import DomainName

_UUID_RE = re.compile(r"[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}")
_HEX32_RE = re.compile(r"[0-9a-f]{32}")

MIN_NAME_LENGTH = 7


class FilterReason(Enum):
    UUID_SUBDOMAIN = "UUID_SUBDOMAIN"
    HEX32_SUBDOMAIN = "HEX32_SUBDOMAIN"
    IPV4_DOTTED = "IPV4_DOTTED"
    IPV4_HYPHEN = "IPV4_HYPHEN"
    TOO_SHORT = "TOO_SHORT"
    ALL_NUMERIC = "ALL_NUMERIC"
    NONE = "NONE"


@dataclass(frozen=True)
class FilterVerdict:
    keep: bool
    reason: FilterReason


def _is_octet(s: str) -> bool:
    return s.isdigit() and 1 <= len(s) <= 3 and int(s) <= 255


def _has_dotted_ipv4(subdomain_labels: tuple[str, ...]) -> bool:
    # four consecutive labels, each a full 0-255 octet
    for i in range(len(subdomain_labels) - 3):
        if all(_is_octet(lbl) for lbl in subdomain_labels[i:i + 4]):
            return True
    return False


def _has_hyphen_ipv4(label: str) -> bool:
    """Four hyphen-joined octets inside one label, e.g. "ip192-168-100-1".

    Alphanumeric prefix/suffix is allowed, but the digit run adjacent to
    each hyphen must itself be a bounded octet: the maximal trailing digit
    run of the first segment and leading digit run of the last segment are
    taken whole, so "999-999-999-999" never matches.
    """
    segments = label.split("-")
    for i in range(len(segments) - 3):
        first, mid_a, mid_b, last = segments[i:i + 4]
        if not (_is_octet(mid_a) and _is_octet(mid_b)):
            continue
        m_first = re.search(r"[0-9]+$", first)
        m_last = re.match(r"[0-9]+", last)
        if m_first is None or m_last is None:
            continue
        if _is_octet(m_first.group()) and _is_octet(m_last.group()):
            return True
    return False


def filter_domain(name: DomainName) -> FilterVerdict:
    """Decide whether a parsed domain enters the pipeline.

    Rule order is fixed: UUID, HEX32, IPV4_DOTTED, IPV4_HYPHEN, TOO_SHORT,
    ALL_NUMERIC.  Total function: never raises on a valid DomainName.
    """
    for label in name.subdomain_labels:
        if _UUID_RE.search(label):
            return FilterVerdict(keep=False, reason=FilterReason.UUID_SUBDOMAIN)
    for label in name.subdomain_labels:
        if _HEX32_RE.search(label):
            return FilterVerdict(keep=False, reason=FilterReason.HEX32_SUBDOMAIN)
    if _has_dotted_ipv4(name.subdomain_labels):
        return FilterVerdict(keep=False, reason=FilterReason.IPV4_DOTTED)
    for label in name.subdomain_labels:
        if _has_hyphen_ipv4(label):
            return FilterVerdict(keep=False, reason=FilterReason.IPV4_HYPHEN)
    # the TLD and its leading dot are removed; interior dots still count
    stem = name.fqdn[:-len(name.tld)]
    if len(stem) < MIN_NAME_LENGTH:
        return FilterVerdict(keep=False, reason=FilterReason.TOO_SHORT)
    core = stem.replace(".", "").replace("-", "")
    if core.isdigit():
        return FilterVerdict(keep=False, reason=FilterReason.ALL_NUMERIC)
    return FilterVerdict(keep=True, reason=FilterReason.NONE)
