"""Run configuration: a single JSON document, overridable by CLI flags.

Relative paths are resolved against the config file's directory.
Credentials never appear in the file; endpoints name the environment
variable holding their key. Validation runs before any network call.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .errors import ConfigError

TASK_EXPLICIT = "explicit"
TASK_IMPLICIT_PARAGRAPH = "implicit_paragraph"
TASK_IMPLICIT_FULLTEXT = "implicit_fulltext"
TASKS = (TASK_EXPLICIT, TASK_IMPLICIT_PARAGRAPH, TASK_IMPLICIT_FULLTEXT)

MODE_NO_LIMIT = "no_limit"
MODE_CHUNKED = "chunked"
CONTEXT_MODES = (MODE_NO_LIMIT, MODE_CHUNKED)

_TASK_TEMPLATE_KEY = {
    TASK_EXPLICIT: "explicit",
    TASK_IMPLICIT_PARAGRAPH: "tabi",
    TASK_IMPLICIT_FULLTEXT: "fulltext",
}


@dataclass
class ModelConfig:
    model_id: str
    backend: str = "openai"  # "openai" | "mock"
    base_url: str = ""
    path: str = "/v1/chat/completions"
    api_key_env: str | None = None
    responses_file: str | None = None
    context_limit_words: int | None = None

    def validate(self) -> None:
        if not self.model_id:
            raise ConfigError("model entry without model_id")
        if self.backend not in ("openai", "mock"):
            raise ConfigError(f"model {self.model_id}: unknown backend "
                              f"{self.backend!r}")
        if self.backend == "openai" and not self.base_url:
            raise ConfigError(f"model {self.model_id}: openai backend needs base_url")
        if self.backend == "mock" and not self.responses_file:
            raise ConfigError(f"model {self.model_id}: mock backend needs "
                              "responses_file")


@dataclass
class ScorerConfig:
    backend: str = "mock"  # "http" | "mock"
    base_url: str = ""
    path: str = "/score"
    table_file: str | None = None
    default: float = 0.0
    reflexive: bool = True
    symmetric: bool = True

    def validate(self) -> None:
        if self.backend not in ("http", "mock"):
            raise ConfigError(f"unknown scorer backend {self.backend!r}")
        if self.backend == "http" and not self.base_url:
            raise ConfigError("http scorer needs base_url")


@dataclass
class Thresholds:
    match: float = 0.55
    entailment: float = 0.4
    cluster: float = 0.55
    grounding: float = 0.8

    def validate(self) -> None:
        for name, value in asdict(self).items():
            if not 0 < value <= 1:
                raise ConfigError(f"threshold {name} must be in (0, 1]")


@dataclass
class RunConfig:
    corpus_path: str
    corpus_format: str
    task: str
    context_mode: str = MODE_NO_LIMIT
    chunk_budget: int = 1000
    models: list[ModelConfig] = field(default_factory=list)
    scorer: ScorerConfig = field(default_factory=ScorerConfig)
    thresholds: Thresholds = field(default_factory=Thresholds)
    comparators: dict = field(
        default_factory=lambda: {"match": "gte", "entailment": "gt"}
    )
    entailment_combiner: str = "min"
    matching_mode: str = "greedy"
    templates: dict = field(default_factory=lambda: {
        "explicit": "explicit/v1", "tabi": "tabi/v1", "fulltext": "fulltext/v1",
    })
    cue_dictionary: str | None = None  # CSV path, or "default"
    filter_flags: list[str] = field(default_factory=list)
    cache_dir: str = ".gapmine_cache"
    output_dir: str = "runs"
    temperature: float = 0.0
    max_output_tokens: int = 1024
    max_in_flight: int = 4
    seed: int = 0
    sample: int | None = None

    def template_id_for_task(self) -> str:
        return self.templates[_TASK_TEMPLATE_KEY[self.task]]

    def validate(self, for_extract: bool = True) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}")
        if self.context_mode not in CONTEXT_MODES:
            raise ConfigError(f"unknown context_mode {self.context_mode!r}")
        if self.context_mode == MODE_CHUNKED and self.task != TASK_EXPLICIT:
            raise ConfigError("chunked context_mode applies to the explicit "
                              "task only")
        if self.chunk_budget < 1:
            raise ConfigError("chunk_budget must be >= 1")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise ConfigError("max_output_tokens must be >= 1")
        if self.max_in_flight < 1:
            raise ConfigError("max_in_flight must be >= 1")
        if self.sample is not None and self.sample < 1:
            raise ConfigError("sample must be >= 1 when set")
        if self.comparators.get("match") not in ("gte", "gt"):
            raise ConfigError("comparators.match must be 'gte' or 'gt'")
        if self.comparators.get("entailment") not in ("gte", "gt"):
            raise ConfigError("comparators.entailment must be 'gte' or 'gt'")
        if self.entailment_combiner not in ("min", "mean"):
            raise ConfigError("entailment_combiner must be 'min' or 'mean'")
        if self.matching_mode not in ("greedy", "optimal"):
            raise ConfigError("matching_mode must be 'greedy' or 'optimal'")
        self.thresholds.validate()
        self.scorer.validate()
        if for_extract:
            if not self.models:
                raise ConfigError("extraction needs at least one model")
            seen = set()
            for model in self.models:
                model.validate()
                if model.model_id in seen:
                    raise ConfigError(f"duplicate model_id {model.model_id!r}")
                seen.add(model.model_id)

    def to_json(self) -> dict:
        return asdict(self)


def _resolve(base: Path, value: str | None) -> str | None:
    if value is None:
        return None
    path = Path(value)
    return str(path if path.is_absolute() else (base / path).resolve())


def load_config(path: str | Path, overrides: dict | None = None) -> RunConfig:
    """Parse, resolve paths, apply flag overrides, and validate."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    base = path.parent

    corpus = data.get("corpus", {})
    try:
        config = RunConfig(
            corpus_path=_resolve(base, corpus.get("path", "")) or "",
            corpus_format=corpus.get("format", ""),
            task=data.get("task", ""),
            context_mode=data.get("context_mode", MODE_NO_LIMIT),
            chunk_budget=int(data.get("chunk_budget", 1000)),
            models=[
                ModelConfig(
                    model_id=m.get("model_id", ""),
                    backend=m.get("backend", "openai"),
                    base_url=m.get("base_url", ""),
                    path=m.get("path", "/v1/chat/completions"),
                    api_key_env=m.get("api_key_env"),
                    responses_file=_resolve(base, m.get("responses_file")),
                    context_limit_words=m.get("context_limit_words"),
                )
                for m in data.get("models", [])
            ],
            scorer=ScorerConfig(
                backend=data.get("scorer", {}).get("backend", "mock"),
                base_url=data.get("scorer", {}).get("base_url", ""),
                path=data.get("scorer", {}).get("path", "/score"),
                table_file=_resolve(base, data.get("scorer", {}).get("table_file")),
                default=float(data.get("scorer", {}).get("default", 0.0)),
                reflexive=bool(data.get("scorer", {}).get("reflexive", True)),
                symmetric=bool(data.get("scorer", {}).get("symmetric", True)),
            ),
            thresholds=Thresholds(**{
                **dict(match=0.55, entailment=0.4, cluster=0.55, grounding=0.8),
                **data.get("thresholds", {}),
            }),
            comparators={
                **{"match": "gte", "entailment": "gt"},
                **data.get("comparators", {}),
            },
            entailment_combiner=data.get("entailment_combiner", "min"),
            matching_mode=data.get("matching_mode", "greedy"),
            templates={
                **{"explicit": "explicit/v1", "tabi": "tabi/v1",
                   "fulltext": "fulltext/v1"},
                **data.get("templates", {}),
            },
            cue_dictionary=(
                data["cue_dictionary"] if data.get("cue_dictionary") == "default"
                else _resolve(base, data.get("cue_dictionary"))
            ),
            filter_flags=list(data.get("filter_flags", [])),
            cache_dir=_resolve(base, data.get("cache_dir", ".gapmine_cache")) or "",
            output_dir=_resolve(base, data.get("output_dir", "runs")) or "",
            temperature=float(data.get("temperature", 0.0)),
            max_output_tokens=int(data.get("max_output_tokens", 1024)),
            max_in_flight=int(data.get("max_in_flight", 4)),
            seed=int(data.get("seed", 0)),
            sample=data.get("sample"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}")

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "context_mode":
            config.context_mode = value
        elif key == "chunk_budget":
            config.chunk_budget = int(value)
        elif key == "models":
            keep = set(value)
            config.models = [m for m in config.models if m.model_id in keep]
            missing = keep - {m.model_id for m in config.models}
            if missing:
                raise ConfigError(f"--model names not in config: {sorted(missing)}")
        elif key in ("match", "entailment", "cluster", "grounding"):
            setattr(config.thresholds, key, float(value))
        elif key == "seed":
            config.seed = int(value)
        elif key == "sample":
            config.sample = int(value)
        else:
            raise ConfigError(f"unknown override {key!r}")
    return config
