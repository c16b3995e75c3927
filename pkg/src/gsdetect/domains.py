"""Domain-name parsing and public-suffix decomposition.

Everything downstream works on :class:`DomainName` values produced by
:func:`parse_fqdn`.  Parsing normalizes threat-intel conventions (defanged
dots, wildcard prefixes, trailing dots) and splits the name against a
bundled public-suffix snapshot so the effective 2LD is deterministic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import MalformedDomain, UnknownSuffix

_LABEL_RE = re.compile(r"^[a-z0-9]([a-z0-9-]*[a-z0-9])?$")

MAX_FQDN_LENGTH = 253
MAX_LABEL_LENGTH = 63


@dataclass(frozen=True)
class DomainName:
    """A parsed FQDN: lowercase ASCII, no trailing dot.

    ``tld`` carries its leading dot (".co.uk"); ``e2ld`` is the registrable
    domain (one label plus the public suffix).
    """

    fqdn: str
    labels: tuple[str, ...]
    tld: str
    e2ld: str
    subdomain_labels: tuple[str, ...]

    def __str__(self) -> str:
        return self.fqdn


@dataclass(frozen=True)
class PublicSuffixSnapshot:
    """Immutable rule sets parsed from a public-suffix list file.

    Rules are stored as label tuples (rightmost label last) so suffix
    matching is a set lookup per candidate length.
    """

    exact: frozenset[tuple[str, ...]]
    wildcard: frozenset[tuple[str, ...]]
    exception: frozenset[tuple[str, ...]]

    def suffix_length(self, labels: tuple[str, ...]) -> int:
        """Number of trailing labels forming the public suffix.

        Canonical semantics: exception rules win, then the matching rule
        with the most labels, then the implicit "*" rule (one label).
        """
        n = len(labels)
        for k in range(1, n + 1):
            if labels[n - k:] in self.exception:
                return k - 1
        best = 0
        for k in range(1, n + 1):
            tail = labels[n - k:]
            if tail in self.exact and k > best:
                best = k
            # "*.foo" consumes one extra label left of foo
            if tail in self.wildcard and k + 1 > best and n >= k + 1:
                best = k + 1
        return best if best > 0 else 1


def load_psl(path: str | Path | None = None) -> PublicSuffixSnapshot:
    """Load a public-suffix snapshot; defaults to the bundled file."""
    if path is None:
        text = (
            resources.files("gsdetect.data")
            .joinpath("public_suffix_snapshot.dat")
            .read_text(encoding="utf-8")
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    exact: set[tuple[str, ...]] = set()
    wildcard: set[tuple[str, ...]] = set()
    exception: set[tuple[str, ...]] = set()
    for raw_line in text.splitlines():
        line = raw_line.strip().lower()
        if not line or line.startswith("//"):
            continue
        if line.startswith("!"):
            exception.add(tuple(line[1:].split(".")))
        elif line.startswith("*."):
            wildcard.add(tuple(line[2:].split(".")))
        else:
            exact.add(tuple(line.split(".")))
    return PublicSuffixSnapshot(
        exact=frozenset(exact),
        wildcard=frozenset(wildcard),
        exception=frozenset(exception),
    )


def normalize_raw(raw: str) -> tuple[str, bool]:
    """Normalize a raw domain string from a feed.

    Reverses "[.]" defanging, lowercases, strips whitespace and a trailing
    dot, and strips one leading "*." wildcard.  Returns the cleaned string
    and whether a wildcard prefix was removed; the flag belongs on the
    ingest record, not in the parsed labels.
    """
    cleaned = raw.strip().lower().replace("[.]", ".")
    wildcard = cleaned.startswith("*.")
    if wildcard:
        cleaned = cleaned[2:]
    if cleaned.endswith("."):
        cleaned = cleaned[:-1]
    return cleaned, wildcard


def parse_fqdn(raw: str, psl: PublicSuffixSnapshot) -> DomainName:
    """Parse and validate a raw domain string into a :class:`DomainName`.

    Raises MalformedDomain for structural violations (bad characters,
    empty labels, length limits) and UnknownSuffix when no registrable
    part exists (single unknown label, or the name is itself a public
    suffix).
    """
    cleaned, _ = normalize_raw(raw)
    if not cleaned:
        raise MalformedDomain("empty domain name")
    if len(cleaned) > MAX_FQDN_LENGTH:
        raise MalformedDomain(f"domain exceeds {MAX_FQDN_LENGTH} chars: {cleaned[:64]}...")
    labels = tuple(cleaned.split("."))
    for label in labels:
        if not label:
            raise MalformedDomain(f"empty label in {cleaned!r}")
        if len(label) > MAX_LABEL_LENGTH:
            raise MalformedDomain(f"label exceeds {MAX_LABEL_LENGTH} chars in {cleaned!r}")
        if not _LABEL_RE.match(label):
            raise MalformedDomain(f"invalid label {label!r} in {cleaned!r}")
    suffix_len = psl.suffix_length(labels)
    if suffix_len >= len(labels):
        raise UnknownSuffix(f"no registrable domain in {cleaned!r}")
    tld = "." + ".".join(labels[-suffix_len:])
    e2ld = ".".join(labels[-(suffix_len + 1):])
    return DomainName(
        fqdn=cleaned,
        labels=labels,
        tld=tld,
        e2ld=e2ld,
        subdomain_labels=labels[:-(suffix_len + 1)],
    )


def effective_2ld(name: DomainName) -> str:
    """Registrable domain of a parsed name."""
    return name.e2ld
