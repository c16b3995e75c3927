"""Domain-name tokenization and embedding.

Two embedding routes share one interface: the built-in reference embedder
(deterministic feature hashing, no trained model needed) and adapters to
an external sentence-embedding model (see :mod:`gsdetect.adapters`).  All
vectors are unit L2 norm; similarity is plain cosine.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import DimensionMismatch

SEPARATORS = (".", "-")

# Relative feature-family weights for the reference embedder.  Token
# identity in the registrable/subdomain region dominates; character
# n-grams and aligned positional characters keep small-edit variants
# close; TLD tokens and structural counts stay weak because they are
# shared by vast numbers of unrelated names (rules re-check the TLD
# anyway).
W_TOKEN = 1.0
W_TOKEN_TLD = 0.3
W_ZONED = 0.5
W_ZONED_TLD = 0.15
W_BIGRAM = 0.4
W_CHUNK = 0.9
W_TRIGRAM = 0.55
W_DIGRAM = 0.3
W_POSCHAR = 0.35
W_COUNTS = 0.25
W_LENGTH = 0.15

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def _load_wordfile(name: str) -> tuple[str, ...]:
    text = resources.files("gsdetect.data").joinpath(name).read_text(encoding="utf-8")
    out = []
    for line in text.splitlines():
        word = line.strip().lower()
        if word and not word.startswith("#"):
            out.append(word)
    return tuple(dict.fromkeys(out))


@dataclass(frozen=True)
class TokenVocabulary:
    """Subword inventory plus exact-match TLD and brand tokens."""

    base_subwords: frozenset[str]
    extra_tlds: tuple[str, ...]
    extra_brands: tuple[str, ...]
    _extras: frozenset[str] = field(init=False, repr=False)
    _max_subword: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        for tok in list(self.extra_tlds) + list(self.extra_brands):
            if tok != tok.lower():
                raise ValueError(f"vocabulary token not lowercase: {tok!r}")
        object.__setattr__(self, "_extras", frozenset(self.extra_tlds) | frozenset(self.extra_brands))
        object.__setattr__(
            self, "_max_subword", max((len(w) for w in self.base_subwords), default=1)
        )

    @classmethod
    def default(cls) -> "TokenVocabulary":
        return cls(
            base_subwords=frozenset(_load_wordfile("subwords.txt")),
            extra_tlds=_load_wordfile("tlds.txt"),
            extra_brands=_load_wordfile("brands.txt"),
        )

    def with_brands(self, brands: list[str] | tuple[str, ...]) -> "TokenVocabulary":
        merged = tuple(dict.fromkeys(list(self.extra_brands) + [b.lower() for b in brands]))
        return TokenVocabulary(self.base_subwords, self.extra_tlds, merged)


def _split_segments(fqdn: str) -> list[str]:
    """Split into segments and separator tokens, keeping both."""
    out: list[str] = []
    current = []
    for ch in fqdn:
        if ch in SEPARATORS:
            if current:
                out.append("".join(current))
                current = []
            out.append(ch)
        else:
            current.append(ch)
    if current:
        out.append("".join(current))
    return out


def _greedy_subwords(segment: str, vocab: TokenVocabulary) -> list[str] | None:
    """Longest-match segmentation; None when some position has no piece."""
    pieces: list[str] = []
    i = 0
    n = len(segment)
    while i < n:
        match = None
        for length in range(min(vocab._max_subword, n - i), 0, -1):
            cand = segment[i:i + length]
            if cand in vocab.base_subwords:
                match = cand
                break
        if match is None:
            return None
        pieces.append(match if i == 0 else "##" + match)
        i += len(match)
    return pieces


def _char_pairs(segment: str) -> list[str]:
    pieces = []
    for i in range(0, len(segment), 2):
        chunk = segment[i:i + 2]
        pieces.append(chunk if i == 0 else "##" + chunk)
    return pieces


def tokenize(fqdn: str, vocab: TokenVocabulary) -> list[str]:
    """Tokenize a normalized FQDN.

    Separators stay as "." and "-" tokens.  Each segment is kept whole if
    it is a known brand/TLD token, else split greedily into subwords
    (continuations carry a "##" prefix), else into character pairs.
    Stripping the "##" markers and concatenating non-separator tokens
    reconstructs every segment exactly.
    """
    tokens: list[str] = []
    for part in _split_segments(fqdn):
        if part in SEPARATORS:
            tokens.append(part)
            continue
        if part in vocab._extras:
            tokens.append(part)
            continue
        pieces = _greedy_subwords(part, vocab)
        if pieces is None:
            pieces = _char_pairs(part)
        tokens.extend(pieces)
    return tokens


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


class ReferenceEmbedder:
    """Deterministic feature-hash embedder over tokenized domain names.

    Signed FNV-1a hashing of token, token-pair, character n-gram, and
    structural features into ``dim`` buckets, then L2 normalization.
    Pure integer hashing with fixed accumulation order, so identical
    inputs are bit-identical across runs and platforms.
    """

    model_name = "reference-v1"

    def __init__(self, vocab: TokenVocabulary | None = None, dim: int = 256, seed: int = 0):
        if dim < 16:
            raise ValueError("embedding dim must be >= 16")
        self.vocab = vocab if vocab is not None else TokenVocabulary.default()
        self.dim = dim
        self.seed = seed
        self._seed_bytes = seed.to_bytes(8, "little", signed=True)
        self._slot_cache: dict[tuple, tuple[int, float]] = {}

    def _slot(self, *parts: str) -> tuple[int, float]:
        cached = self._slot_cache.get(parts)
        if cached is not None:
            return cached
        h = _fnv1a(self._seed_bytes + b"\x1f".join(p.encode("ascii", "replace") for p in parts))
        slot = (h % self.dim, 1.0 if (h >> 63) & 1 else -1.0)
        if len(self._slot_cache) < 1_000_000:
            self._slot_cache[parts] = slot
        return slot

    def _features(self, fqdn: str) -> list[tuple[int, float]]:
        tokens = tokenize(fqdn, self.vocab)
        # zone: dot-segments counted from the right, capped at 2, so the
        # TLD-ish, e2LD-ish, and subdomain regions hash apart
        n_dots = fqdn.count(".")
        feats: list[tuple[int, float]] = []
        seg_from_left = 0
        prev_text: str | None = None
        for tok in tokens:
            if tok == ".":
                seg_from_left += 1
                continue
            if tok == "-":
                continue
            zone = min(n_dots - seg_from_left, 2)
            text = tok[2:] if tok.startswith("##") else tok
            w_token, w_zoned = (W_TOKEN_TLD, W_ZONED_TLD) if zone == 0 else (W_TOKEN, W_ZONED)
            slot, sign = self._slot("t", text)
            feats.append((slot, sign * w_token))
            slot, sign = self._slot("z", text, str(zone))
            feats.append((slot, sign * w_zoned))
            if prev_text is not None:
                slot, sign = self._slot("b", prev_text, text)
                feats.append((slot, sign * W_BIGRAM))
            prev_text = text
        # the character-level families run over the stem (everything left
        # of the last dot): squatting variation lives there, while TLD
        # characters would bind unrelated names
        stem = fqdn.rsplit(".", 1)[0]
        chunk = stem.split("-", 1)[0]
        slot, sign = self._slot("h0", chunk)
        feats.append((slot, sign * W_CHUNK))
        for i in range(len(stem) - 2):
            slot, sign = self._slot("c3", stem[i:i + 3])
            feats.append((slot, sign * W_TRIGRAM))
        for i in range(len(stem) - 1):
            slot, sign = self._slot("c2", stem[i:i + 2])
            feats.append((slot, sign * W_DIGRAM))
        for i, ch in enumerate(stem):
            slot, sign = self._slot("cp", str(i), ch)
            feats.append((slot, sign * W_POSCHAR))
        structure = (
            (W_COUNTS, "dots", str(n_dots)),
            (W_COUNTS, "hyph", str(fqdn.count("-"))),
            (W_LENGTH, "len", str(len(stem) // 4)),
        )
        for weight, kind, value in structure:
            slot, sign = self._slot(kind, value)
            feats.append((slot, sign * weight))
        return feats

    def embed(self, fqdn: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for slot, value in self._features(fqdn):
            vec[slot] += value
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            warnings.warn(f"degenerate all-zero embedding for {fqdn!r}; emitting basis vector")
            vec[0] = 1.0
            return vec
        return vec / norm

    def embed_batch(self, fqdns: list[str]) -> np.ndarray:
        if not fqdns:
            return np.zeros((0, self.dim), dtype=np.float64)
        return np.stack([self.embed(f) for f in fqdns])


def embed_reference(fqdn: str, vocab: TokenVocabulary, dim: int = 256, seed: int = 0) -> np.ndarray:
    return ReferenceEmbedder(vocab, dim=dim, seed=seed).embed(fqdn)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity dot(u,v) / (|u||v|)."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatch(f"vector dims differ: {u.shape} vs {v.shape}")
    return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))


def unit(values: np.ndarray) -> np.ndarray:
    """Renormalize to unit L2 norm (used on vectors received from adapters)."""
    arr = np.asarray(values, dtype=np.float64)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("cannot normalize zero or non-finite vector")
    return arr / norm
