from __future__ import annotations

import pytest

from gsdetect.domains import load_psl, parse_fqdn
from gsdetect.embedding import ReferenceEmbedder, TokenVocabulary


@pytest.fixture(scope="session")
def psl():
    return load_psl()


@pytest.fixture(scope="session")
def vocab():
    return TokenVocabulary.default()


@pytest.fixture(scope="session")
def embedder(vocab):
    return ReferenceEmbedder(vocab=vocab)


@pytest.fixture(scope="session")
def parse(psl):
    def _parse(raw: str):
        return parse_fqdn(raw, psl)

    return _parse
