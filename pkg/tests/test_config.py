from __future__ import annotations

import json

import pytest

from gsdetect.adapters import FileEmbedder
from gsdetect.config import CONFIG_ENV_VAR, PipelineConfig, build_config, make_embedder
from gsdetect.embedding import ReferenceEmbedder
from gsdetect.errors import ConfigError


def test_defaults():
    config = build_config()
    assert config.eps == 0.04
    assert config.min_pts == 3
    assert config.k == 2
    assert config.embedder == "reference"
    assert config.mode == "exact"
    assert config.lookback_days == 60
    assert config.resolved_threshold() == pytest.approx(0.96)


def test_threshold_derives_from_eps():
    assert build_config({"eps": 0.1}).resolved_threshold() == pytest.approx(0.9)


def test_explicit_threshold_overrides_derivation():
    config = build_config({"eps": 0.1, "threshold": 0.5})
    assert config.resolved_threshold() == 0.5


def test_file_overrides_defaults(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"eps": 0.05, "k": 3}))
    config = build_config(config_path=path)
    assert config.eps == 0.05
    assert config.k == 3
    assert config.min_pts == 3  # untouched default


def test_flags_override_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"eps": 0.05, "k": 3}))
    config = build_config({"eps": 0.07, "k": None}, config_path=path)
    assert config.eps == 0.07  # flag wins
    assert config.k == 3  # None flag does not override the file


def test_env_var_names_config_file(tmp_path, monkeypatch):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"min_pts": 5}))
    monkeypatch.setenv(CONFIG_ENV_VAR, str(path))
    assert build_config().min_pts == 5


def test_explicit_path_beats_env_var(tmp_path, monkeypatch):
    env_path = tmp_path / "env.json"
    env_path.write_text(json.dumps({"min_pts": 5}))
    arg_path = tmp_path / "arg.json"
    arg_path.write_text(json.dumps({"min_pts": 4}))
    monkeypatch.setenv(CONFIG_ENV_VAR, str(env_path))
    assert build_config(config_path=arg_path).min_pts == 4


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"epps": 0.05}))
    with pytest.raises(ConfigError, match="epps"):
        build_config(config_path=path)


def test_unreadable_and_invalid_files(tmp_path):
    with pytest.raises(ConfigError):
        build_config(config_path=tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ConfigError):
        build_config(config_path=bad)
    array = tmp_path / "array.json"
    array.write_text("[1,2]")
    with pytest.raises(ConfigError):
        build_config(config_path=array)


@pytest.mark.parametrize(
    "overrides",
    [
        {"eps": 0.0},
        {"eps": 1.5},
        {"min_pts": 1},
        {"threshold": 1.5},
        {"k": 0},
        {"mode": "turbo"},
        {"embedder": "magic"},
        {"lookback_days": 0},
    ],
)
def test_validation_errors(overrides):
    with pytest.raises(ConfigError):
        build_config(overrides)


def test_make_embedder_reference():
    embedder = make_embedder(build_config())
    assert isinstance(embedder, ReferenceEmbedder)


def test_make_embedder_file(tmp_path):
    import numpy as np

    from gsdetect.adapters import write_embedding_file

    path = tmp_path / "emb.ldjson"
    write_embedding_file(path, ["a.test"], np.eye(1, 8), model="m")
    embedder = make_embedder(build_config({"embedder": f"file:{path}"}))
    assert isinstance(embedder, FileEmbedder)
    assert embedder.dim == 8


def test_config_frozen():
    config = PipelineConfig()
    with pytest.raises(AttributeError):
        config.eps = 0.5
