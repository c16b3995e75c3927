"""Deterministic synthesis of squatting-style domain clusters and benign
background names.

Real phishing corpora are private, so evaluation runs on generated
stand-ins: clusters mimic combosquatting, typosquatting, deceptive
subdomains, and random-suffix registration patterns; benign names are
pronounceable nonsense.  Every generator draws from SplitMix64, a
64-bit integer PRNG pinned here so identical (template, seed) inputs
produce byte-identical output on any platform.

Generated cluster members always pass the prefilter and pairwise
satisfy labeling-guideline conditions 2-4 (length agreement, subdomain
counts, dot/hyphen positions).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .domains import DomainName, PublicSuffixSnapshot, load_psl, parse_fqdn
from .errors import ImpossibleTemplate, UnknownSuffix
from .prefilter import filter_domain

_MASK64 = 0xFFFFFFFFFFFFFFFF

_LETTERS = "abcdefghijklmnopqrstuvwxyz"
_ALNUM = "abcdefghijklmnopqrstuvwxyz0123456789"

_CONSONANTS = "bcdfghjklmnpqrstvwz"
_VOWELS = "aeiou"

_BENIGN_TLDS = (".com", ".net", ".org", ".info", ".biz", ".xyz",
                ".site", ".online", ".shop", ".store")

_DECEPTIVE_FIRST = ("co", "com", "net")
_DECEPTIVE_SECOND = ("jp", "uk", "de", "us", "fr")

_MIN_STEM = 7          # prefilter drops shorter stems
_MAX_TYPO_EDITS = 3
_MAX_ATTEMPTS = 1000


class SplitMix64:
    """Fixed-algorithm 64-bit PRNG (the SplitMix64 output function over
    an incrementing Weyl sequence).  Chosen over library generators so
    golden files survive interpreter and numpy upgrades."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n).  Plain modulo; the bias at 64 bits
        is far below anything observable and keeps the stream simple."""
        if n <= 0:
            raise ValueError(f"below() needs a positive bound, got {n}")
        return self.next_u64() % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], endpoints included."""
        return lo + self.below(hi - lo + 1)

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


class Technique(enum.Enum):
    COMBO = "combo"
    TYPO = "typo"
    DECEPTIVE_SUBDOMAIN = "deceptive_subdomain"
    RANDOM_SUFFIX = "random_suffix"


@dataclass(frozen=True)
class SynthTemplate:
    brand: str
    technique: Technique
    tld_pool: tuple[str, ...]
    count: int
    seed: int

    def __post_init__(self) -> None:
        if self.count < 3:
            raise ImpossibleTemplate(
                f"cluster needs >= 3 members to be clusterable, got {self.count}"
            )
        if not self.tld_pool:
            raise ImpossibleTemplate("tld_pool is empty")
        if not self.brand or not all(c in _ALNUM for c in self.brand):
            raise ImpossibleTemplate(f"brand must be lowercase alphanumeric: {self.brand!r}")
        for tld in self.tld_pool:
            if not tld.startswith("."):
                raise ImpossibleTemplate(f"tld must start with a dot: {tld!r}")


@lru_cache(maxsize=1)
def _wordlist() -> tuple[str, ...]:
    text = resources.files("gsdetect.data").joinpath("words.txt").read_text()
    return tuple(
        line.strip() for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


@lru_cache(maxsize=1)
def _brandlist() -> tuple[str, ...]:
    text = resources.files("gsdetect.data").joinpath("brands.txt").read_text()
    return tuple(
        line.strip() for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


def _parse_member(stem: str, tld: str, psl: PublicSuffixSnapshot) -> DomainName:
    try:
        name = parse_fqdn(stem + tld, psl)
    except UnknownSuffix:
        raise ImpossibleTemplate(
            f"tld {tld!r} is not in the public-suffix snapshot"
        ) from None
    if not filter_domain(name).keep:
        raise ImpossibleTemplate(f"generated name {name.fqdn!r} fails the prefilter")
    return name


def _combo_members(tpl: SynthTemplate, rng: SplitMix64, psl) -> list[DomainName]:
    words = _wordlist()
    anchor = rng.choice(words)
    # window of +/-1 around the anchor keeps stem-length spread <= 2
    pool = [w for w in words if abs(len(w) - len(anchor)) <= 1]
    if len(pool) < tpl.count:
        raise ImpossibleTemplate(
            f"only {len(pool)} words near length {len(anchor)}, need {tpl.count}"
        )
    pool = list(pool)
    rng.shuffle(pool)
    return [
        _parse_member(f"{tpl.brand}-{word}", rng.choice(tpl.tld_pool), psl)
        for word in pool[: tpl.count]
    ]


def _typo_variant(brand: str, rng: SplitMix64, pad: int, extra_budget: int) -> str:
    chars = list(brand)
    for _ in range(pad):
        pos = rng.below(len(chars) + 1)
        chars.insert(pos, rng.choice(_LETTERS))
    lo = 1 if pad == 0 else 0
    if extra_budget >= lo:
        # min of two draws biases toward single-character slips, the
        # common case in observed typosquats
        extra = min(rng.randint(lo, extra_budget), rng.randint(lo, extra_budget))
    else:
        extra = 0
    for _ in range(extra):
        if rng.below(2) == 0 and len(chars) >= 2:
            pos = rng.below(len(chars) - 1)
            if chars[pos] != chars[pos + 1]:
                chars[pos], chars[pos + 1] = chars[pos + 1], chars[pos]
                continue
        pos = rng.below(len(chars))
        replacement = rng.choice(_LETTERS)
        while replacement == chars[pos]:
            replacement = rng.choice(_LETTERS)
        chars[pos] = replacement
    return "".join(chars)


def _typo_members(tpl: SynthTemplate, rng: SplitMix64, psl) -> list[DomainName]:
    pad = max(0, _MIN_STEM - len(tpl.brand))
    if pad > _MAX_TYPO_EDITS:
        raise ImpossibleTemplate(
            f"brand {tpl.brand!r} is too short: {pad} insertions would be "
            f"needed to pass the prefilter, but edits are capped at {_MAX_TYPO_EDITS}"
        )
    members: list[DomainName] = []
    stems: set[str] = set()
    for _ in range(tpl.count):
        for _ in range(_MAX_ATTEMPTS):
            stem = _typo_variant(tpl.brand, rng, pad, _MAX_TYPO_EDITS - pad)
            if stem != tpl.brand and stem not in stems:
                break
        else:
            raise ImpossibleTemplate(
                f"could not generate {tpl.count} distinct typo variants of {tpl.brand!r}"
            )
        stems.add(stem)
        members.append(_parse_member(stem, rng.choice(tpl.tld_pool), psl))
    return members


def _deceptive_members(tpl: SynthTemplate, rng: SplitMix64, psl) -> list[DomainName]:
    phrase = f"{tpl.brand}-{rng.choice(_DECEPTIVE_FIRST)}-{rng.choice(_DECEPTIVE_SECOND)}"
    members: list[DomainName] = []
    used: set[str] = set()
    for _ in range(tpl.count):
        sub = phrase
        if rng.below(2) == 0:
            # one length-preserving substitution, only past the brand and
            # never on a hyphen, so positions stay pairwise identical
            positions = [
                i for i in range(len(tpl.brand) + 1, len(phrase)) if phrase[i] != "-"
            ]
            pos = rng.choice(positions)
            replacement = rng.choice(_LETTERS)
            while replacement == phrase[pos]:
                replacement = rng.choice(_LETTERS)
            sub = phrase[:pos] + replacement + phrase[pos + 1:]
        for _ in range(_MAX_ATTEMPTS):
            e2label = "".join(rng.choice(_ALNUM) for _ in range(6))
            if e2label not in used:
                break
        else:
            raise ImpossibleTemplate("exhausted distinct 6-char registrations")
        used.add(e2label)
        members.append(
            _parse_member(f"{sub}.{e2label}", rng.choice(tpl.tld_pool), psl)
        )
    return members


def _suffix_members(tpl: SynthTemplate, rng: SplitMix64, psl) -> list[DomainName]:
    members: list[DomainName] = []
    stems: set[str] = set()
    for _ in range(tpl.count):
        for _ in range(_MAX_ATTEMPTS):
            suffix = "".join(rng.choice(_ALNUM) for _ in range(rng.randint(6, 8)))
            stem = f"{tpl.brand}-{suffix}"
            if stem not in stems:
                break
        else:
            raise ImpossibleTemplate("exhausted distinct random suffixes")
        stems.add(stem)
        members.append(_parse_member(stem, rng.choice(tpl.tld_pool), psl))
    return members


def synthesize_cluster(
    tpl: SynthTemplate, psl: PublicSuffixSnapshot | None = None
) -> list[DomainName]:
    """Generate one squatting cluster from a template, deterministically
    per (template, seed)."""
    psl = psl or load_psl()
    rng = SplitMix64(tpl.seed)
    if tpl.technique is Technique.COMBO:
        return _combo_members(tpl, rng, psl)
    if tpl.technique is Technique.TYPO:
        return _typo_members(tpl, rng, psl)
    if tpl.technique is Technique.DECEPTIVE_SUBDOMAIN:
        return _deceptive_members(tpl, rng, psl)
    return _suffix_members(tpl, rng, psl)


def _benign_stem(rng: SplitMix64) -> str:
    syllables = rng.randint(3, 5)
    parts = []
    for _ in range(syllables):
        parts.append(rng.choice(_CONSONANTS) + rng.choice(_VOWELS))
        if rng.below(3) == 0:
            parts.append(rng.choice(_CONSONANTS))
    stem = "".join(parts)
    if rng.below(2) == 0:
        stem += str(rng.below(100))
    while len(stem) < _MIN_STEM:
        stem += rng.choice(_CONSONANTS) + rng.choice(_VOWELS)
    return stem


def synthesize_benign(
    count: int, seed: int, psl: PublicSuffixSnapshot | None = None
) -> list[DomainName]:
    """Generate pronounceable benign background domains, deterministic
    per seed and guaranteed free of every bundled brand substring."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    psl = psl or load_psl()
    brands = _brandlist()
    rng = SplitMix64(seed)
    out: list[DomainName] = []
    seen: set[str] = set()
    while len(out) < count:
        stem = _benign_stem(rng)
        if any(brand in stem for brand in brands):
            continue
        fqdn = stem + rng.choice(_BENIGN_TLDS)
        if fqdn in seen:
            continue
        seen.add(fqdn)
        name = parse_fqdn(fqdn, psl)
        if not filter_domain(name).keep:
            continue
        out.append(name)
    return out
