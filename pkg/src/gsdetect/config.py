"""Pipeline configuration with layered precedence.

Values resolve as command-line flags > config file > defaults.  The
config file is JSON; its path comes from an explicit argument or the
PR_CONFIG environment variable.  Defaults are the operating values the
pipeline was designed around: eps 0.04, min_pts 3, threshold 1 - eps,
k 2, 60-day TI lookback.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

CONFIG_ENV_VAR = "PR_CONFIG"

_EMBEDDER_SPECS = ("reference", "file:", "sidecar:")


@dataclass(frozen=True)
class PipelineConfig:
    eps: float = 0.04
    min_pts: int = 3
    threshold: float | None = None  # None derives 1 - eps
    k: int = 2
    embedder: str = "reference"
    psl_path: str | None = None
    lookback_days: int = 60
    clusters_path: str | None = None
    rules_path: str | None = None
    embeddings_path: str | None = None
    out_path: str | None = None
    mode: str = "exact"
    seed: int = 0

    def resolved_threshold(self) -> float:
        return self.threshold if self.threshold is not None else 1.0 - self.eps

    def validate(self) -> "PipelineConfig":
        if not 0.0 < self.eps < 1.0:
            raise ConfigError(f"eps must be in (0, 1), got {self.eps}")
        if self.min_pts < 2:
            raise ConfigError(f"min_pts must be >= 2, got {self.min_pts}")
        t = self.resolved_threshold()
        if not 0.0 < t < 1.0:
            raise ConfigError(f"threshold must be in (0, 1), got {t}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.mode not in ("exact", "ann-verified", "ann"):
            raise ConfigError(f"mode must be exact|ann-verified|ann, got {self.mode!r}")
        if self.embedder != "reference" and not self.embedder.startswith(("file:", "sidecar:")):
            raise ConfigError(
                f"embedder must be one of {_EMBEDDER_SPECS}, got {self.embedder!r}"
            )
        if self.lookback_days < 1:
            raise ConfigError(f"lookback_days must be >= 1, got {self.lookback_days}")
        return self


def _load_config_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def build_config(flag_values: dict | None = None,
                 config_path: str | Path | None = None) -> PipelineConfig:
    """Merge defaults, an optional config file, and explicit flag values.

    ``flag_values`` entries equal to None mean "flag not given" and do
    not override.  When ``config_path`` is None, PR_CONFIG is consulted.
    """
    known = {f.name for f in fields(PipelineConfig)}
    merged: dict = {}
    if config_path is None:
        config_path = os.environ.get(CONFIG_ENV_VAR) or None
    if config_path is not None:
        file_values = _load_config_file(config_path)
        unknown = set(file_values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_values)
    for key, value in (flag_values or {}).items():
        if key in known and value is not None:
            merged[key] = value
    try:
        config = PipelineConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return config.validate()


def make_embedder(config: PipelineConfig):
    """Instantiate the embedder the config names: the built-in reference
    embedder, a precomputed-vector file, or a sidecar process."""
    from .adapters import FileEmbedder, SidecarEmbedder
    from .embedding import ReferenceEmbedder

    spec = config.embedder
    if spec == "reference":
        return ReferenceEmbedder(seed=config.seed)
    if spec.startswith("file:"):
        return FileEmbedder(spec[len("file:"):])
    if spec.startswith("sidecar:"):
        return SidecarEmbedder(spec[len("sidecar:"):])
    raise ConfigError(f"unrecognized embedder spec {spec!r}")
