"""Engine configuration and the ``key = value`` config file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any

EVIDENCE_TYPES = ("N", "V", "F", "E", "D")

# Parameters that change profiles or signatures. An index built with one set
# of values cannot be queried with another.
INDEX_PARAMS = (
    "qgram_size",
    "minhash_size",
    "rp_bits",
    "lsh_threshold",
    "forest_trees",
    "forest_depth",
    "theta_num",
    "null_markers",
    "subject_weights",
    "sample_cap",
    "embedding_path",
    "seed",
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class IngestConfig:
    theta_num: float = 0.9
    null_markers: tuple[str, ...] = ("", "-", "na", "n/a", "null")
    extensions: tuple[str, ...] = (".csv", ".tsv", ".txt", ".psv")

    def is_null(self, cell: str) -> bool:
        return cell.strip().lower() in self.null_markers


@dataclass(frozen=True)
class Config:
    qgram_size: int = 4
    minhash_size: int = 256
    rp_bits: int = 256
    lsh_threshold: float = 0.7
    forest_trees: int = 8
    forest_depth: int = 32
    lookup_budget_factor: int = 4
    theta_num: float = 0.9
    null_markers: tuple[str, ...] = ("", "-", "na", "n/a", "null")
    subject_weights: tuple[float, float, float] = (0.4, 0.3, 0.3)
    # Either five numbers in N, V, F, E, D order or the string "fitted".
    eq3_weights: Any = (1.0, 1.0, 1.0, 1.0, 1.0)
    embedding_path: str | None = None
    sample_cap: int = 100_000
    seed: int = 42
    max_join_len: int = 3
    graph_budget: int = 64

    def __post_init__(self) -> None:
        if not 0.0 < self.lsh_threshold < 1.0:
            raise ConfigError(f"lsh_threshold must lie in (0, 1), got {self.lsh_threshold}")
        for name in ("minhash_size", "rp_bits"):
            if getattr(self, name) < 16:
                raise ConfigError(f"{name} must be >= 16")
        if self.qgram_size < 2:
            raise ConfigError("qgram_size must be >= 2")
        if self.forest_trees < 1 or self.forest_depth < 1:
            raise ConfigError("forest_trees and forest_depth must be positive")
        if self.lookup_budget_factor < 1:
            raise ConfigError("lookup_budget_factor must be positive")
        if not 0.0 < self.theta_num <= 1.0:
            raise ConfigError("theta_num must lie in (0, 1]")
        if len(self.subject_weights) != 3:
            raise ConfigError("subject_weights needs three values")
        w = self.eq3_weights
        if w != "fitted":
            if len(w) != 5 or any(x < 0 for x in w) or not any(x > 0 for x in w):
                raise ConfigError("eq3_weights needs five non-negative values, not all zero")

    @property
    def ingest(self) -> IngestConfig:
        return IngestConfig(theta_num=self.theta_num, null_markers=self.null_markers)

    def index_params(self) -> dict[str, Any]:
        out = {}
        for name in INDEX_PARAMS:
            value = getattr(self, name)
            out[name] = list(value) if isinstance(value, tuple) else value
        return out

    def replace(self, **changes: Any) -> "Config":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, (tuple, list)):
                value = ", ".join(_fmt(v) for v in value)
            lines.append(f"{f.name} = {_fmt(value)}")
        return "\n".join(lines) + "\n"


def _fmt(value: Any) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _convert(name: str, raw: str, default: Any) -> Any:
    raw = raw.strip()
    if name == "eq3_weights":
        if raw.lower() == "fitted":
            return "fitted"
        return tuple(float(x) for x in raw.split(","))
    if name == "null_markers":
        return tuple(x.strip().lower() for x in raw.split(","))
    if name == "embedding_path":
        return raw or None
    if isinstance(default, tuple):
        return tuple(float(x) for x in raw.split(","))
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def parse_config_text(text: str, base: Config | None = None) -> Config:
    base = base or Config()
    known = {f.name for f in dataclasses.fields(Config)}
    changes: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            changes[key] = _convert(key, value, getattr(base, key))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    return dataclasses.replace(base, **changes)


def load_config(path: str | Path | None, **overrides: Any) -> Config:
    config = Config()
    if path is not None:
        config = parse_config_text(Path(path).read_text(encoding="utf-8"), config)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return dataclasses.replace(config, **overrides) if overrides else config


def config_from_params(params: dict[str, Any], base: Config | None = None) -> Config:
    """Rebuild a config from the parameter block stored in an index manifest."""
    base = base or Config()
    changes = {}
    for name in INDEX_PARAMS:
        if name in params:
            value = params[name]
            changes[name] = tuple(value) if isinstance(value, list) else value
    return dataclasses.replace(base, **changes)


def parse_weights_text(text: str) -> tuple[float, ...]:
    """Read evidence weights written either as ``N = 1.0`` lines or one list."""
    values: dict[str, float] = {}
    loose: list[float] = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = (s.strip() for s in line.split("=", 1))
            if key.upper() not in EVIDENCE_TYPES:
                raise ConfigError(f"unknown evidence type {key!r}")
            values[key.upper()] = float(value)
        else:
            loose.extend(float(x) for x in line.replace(",", " ").split())
    if values:
        missing = [t for t in EVIDENCE_TYPES if t not in values]
        if missing:
            raise ConfigError(f"weights file missing {', '.join(missing)}")
        return tuple(values[t] for t in EVIDENCE_TYPES)
    if len(loose) != 5:
        raise ConfigError("weights file needs five values")
    return tuple(loose)


def format_weights(weights: tuple[float, ...] | list[float]) -> str:
    return "".join(f"{t} = {w!r}\n" for t, w in zip(EVIDENCE_TYPES, weights))


__all__ = [
    "Config",
    "ConfigError",
    "EVIDENCE_TYPES",
    "IngestConfig",
    "config_from_params",
    "format_weights",
    "load_config",
    "parse_config_text",
    "parse_weights_text",
]
