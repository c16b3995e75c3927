from __future__ import annotations

import pytest

from trainer import TrainerConfig, build_tokenizer

BRANDS = ["lumipay", "vextabank", "orbimail", "zenocard", "quorvex",
          "nimbuspay", "astrelbank", "credora", "fintara", "meridocard"]
WORDS = ["login", "secure", "verify", "account", "update", "portal"]


def make_clusters(brands=None) -> list[list[str]]:
    brands = brands or BRANDS
    return [[f"{brand}-{word}{i}.com" for word in WORDS for i in range(2)]
            for brand in brands]


def make_pool() -> list[str]:
    return [
        f"{c1}{v1}{c2}{v2}ta{i}.net"
        for i, (c1, v1, c2, v2) in enumerate(
            (a, b, c, d)
            for a in "bdfgk" for b in "aeiou" for c in "lmnrs" for d in "aeiou"
        )
    ]


@pytest.fixture(scope="session")
def tokenizer():
    return build_tokenizer()


@pytest.fixture()
def tiny_config():
    return TrainerConfig(hidden_size=32, num_layers=1, num_heads=2,
                         intermediate_size=64, epochs=1, batch_size=16, seed=3)
