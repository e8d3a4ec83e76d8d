"""Declarative experiment configuration.

One JSON file describes an experiment: input paths, pipeline knobs, solver
parameters, and the mining client. Everything is validated at load time so a
bad path or out-of-range knob fails before any work starts, and the raw file
is hashed so run manifests can prove which configuration produced an output.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import ConfigurationError

DEFAULT_API_KEY_ENV = "FEEDPRIO_API_KEY"

REQUIRED_EXISTING = (
    "requirements",
    "reviews",
    "benchmark",
    "fixtures",
    "gold_pairs",
    "clusters",
    "pairs",
    "requirement_embeddings",
    "message_embeddings",
    "score_file",
    "stopwords",
    "lexicon",
)


@dataclass(frozen=True)
class PathsConfig:
    """Input and output locations. All inputs must exist when configured."""

    output_dir: Path
    requirements: Path | None = None
    reviews: Path | None = None
    benchmark: Path | None = None
    fixtures: Path | None = None
    gold_pairs: Path | None = None
    clusters: Path | None = None
    pairs: Path | None = None
    requirement_embeddings: Path | None = None
    message_embeddings: Path | None = None
    score_file: Path | None = None
    stopwords: Path | None = None
    lexicon: Path | None = None


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs for association, topics, and scoring."""

    n_topics: int = 20
    passes: int = 15
    threshold: float = 0.1
    vectorizer: str = "tfidf"  # or "counts"
    coherence_space: str = "tfidf"  # or "topic"
    stem: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.n_topics < 1:
            raise ConfigurationError(f"n_topics must be positive, got {self.n_topics}")
        if self.passes < 1:
            raise ConfigurationError(f"passes must be positive, got {self.passes}")
        if not 0.0 <= self.threshold < 1.0:
            raise ConfigurationError(f"association threshold {self.threshold} outside [0, 1)")
        if self.vectorizer not in ("tfidf", "counts"):
            raise ConfigurationError(f"vectorizer must be 'tfidf' or 'counts', got {self.vectorizer!r}")
        if self.coherence_space not in ("tfidf", "topic"):
            raise ConfigurationError(
                f"coherence_space must be 'tfidf' or 'topic', got {self.coherence_space!r}"
            )


@dataclass(frozen=True)
class SolverConfig:
    """NSGA-II parameters plus the benchmark experiment shape."""

    population: int = 200
    generations: int = 50
    tournament: int = 5
    crossover_prob: float = 0.8
    mutation_prob: float | None = None
    crowding: str = "full"
    runs: int = 10
    seed: int = 0
    dvalue_variants: tuple[str, ...] = ("raw", "log", "inverse", "power", "zscore")
    requires_filter: bool = False
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigurationError(f"runs must be positive, got {self.runs}")
        from .mining import DVALUE_VARIANTS

        unknown = [v for v in self.dvalue_variants if v not in DVALUE_VARIANTS]
        if unknown:
            raise ConfigurationError(f"unknown dependency-value variants: {unknown}")


@dataclass(frozen=True)
class MiningConfig:
    """Chat-completion client selection."""

    mode: str = "fixture"  # or "live"
    endpoint: str | None = None
    model: str | None = None
    api_key_env: str = DEFAULT_API_KEY_ENV
    temperature: float = 0.0
    max_in_flight: int = 4

    def __post_init__(self):
        if self.mode not in ("fixture", "live"):
            raise ConfigurationError(f"mining mode must be 'fixture' or 'live', got {self.mode!r}")
        if self.max_in_flight < 1:
            raise ConfigurationError(f"max_in_flight must be positive, got {self.max_in_flight}")

    def api_key(self) -> str | None:
        return os.environ.get(self.api_key_env)


@dataclass(frozen=True)
class RunConfig:
    paths: PathsConfig
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    mining: MiningConfig = field(default_factory=MiningConfig)
    config_sha256: str = ""


def _build_section(cls, payload: Mapping[str, Any], section: str):
    valid = {f.name for f in fields(cls)}
    unknown = set(payload) - valid
    if unknown:
        raise ConfigurationError(f"unknown {section} keys: {sorted(unknown)}")
    return cls(**payload)


def _apply_overrides(payload: dict, overrides: Sequence[str]) -> None:
    """Apply ``section.key=value`` command-line overrides onto the raw payload.

    Values parse as JSON when possible (numbers, booleans, lists) and fall
    back to plain strings, so ``--set solver.seed=7`` and
    ``--set paths.pairs=out/pairs.csv`` both work.
    """
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigurationError(f"override {item!r} is not of the form section.key=value")
        section, dot, name = key.partition(".")
        if not dot or not section or not name:
            raise ConfigurationError(f"override key {key!r} is not of the form section.key")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        payload.setdefault(section, {})[name] = parsed


def load_config(path: str | Path, overrides: Sequence[str] = ()) -> RunConfig:
    """Parse and validate a JSON config file.

    Every configured input path must exist; the output directory is created.
    ``overrides`` are ``section.key=value`` strings applied on top of the file.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file {path} does not exist")
    raw = path.read_text(encoding="utf-8")
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise ConfigurationError(f"{path}: config must be a JSON object")
    if overrides:
        _apply_overrides(payload, overrides)
    known_sections = {"paths", "pipeline", "solver", "mining"}
    unknown = set(payload) - known_sections
    if unknown:
        raise ConfigurationError(f"{path}: unknown config sections {sorted(unknown)}")

    paths_payload = dict(payload.get("paths", {}))
    if "output_dir" not in paths_payload:
        raise ConfigurationError(f"{path}: paths.output_dir is required")
    base = path.parent
    resolved: dict[str, Any] = {}
    for key, value in paths_payload.items():
        if value is None:
            resolved[key] = None
            continue
        candidate = Path(value)
        resolved[key] = candidate if candidate.is_absolute() else base / candidate
    paths = _build_section(PathsConfig, resolved, "paths")
    for name in REQUIRED_EXISTING:
        configured = getattr(paths, name)
        if configured is not None and not configured.exists():
            raise ConfigurationError(f"configured paths.{name} does not exist: {configured}")
    paths.output_dir.mkdir(parents=True, exist_ok=True)

    solver_payload = dict(payload.get("solver", {}))
    if "dvalue_variants" in solver_payload:
        solver_payload["dvalue_variants"] = tuple(solver_payload["dvalue_variants"])
    if "weights" in solver_payload and solver_payload["weights"] is not None:
        solver_payload["weights"] = tuple(float(w) for w in solver_payload["weights"])

    hashed = raw if not overrides else raw + "\x00" + "\n".join(overrides)
    return RunConfig(
        paths=paths,
        pipeline=_build_section(PipelineConfig, payload.get("pipeline", {}), "pipeline"),
        solver=_build_section(SolverConfig, solver_payload, "solver"),
        mining=_build_section(MiningConfig, payload.get("mining", {}), "mining"),
        config_sha256=hashlib.sha256(hashed.encode("utf-8")).hexdigest(),
    )
