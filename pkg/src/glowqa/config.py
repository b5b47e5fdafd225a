"""YAML configuration and engine assembly.

Relative paths inside the config resolve against the config file's
directory, so a fixture directory is fully self-contained.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .gnn import GnnClient
from .kgstore import extract_schema, load_triples
from .llm import (
    DEFAULT_CONCURRENCY,
    DEFAULT_MAX_TOKENS,
    HttpChatGateway,
    LlmSession,
    MockChatGateway,
)
from .pipeline import Engine, KnowledgeGraph
from .retriever import DEFAULT_CAPS


@dataclass
class KGConfig:
    name: str
    triples: str | None = None
    format: str = "ntriples"
    prefix: str = ""
    description: str = ""
    typing_predicate: str | None = None
    sparql_endpoint: str | None = None


@dataclass
class LlmConfig:
    mode: str = "http"  # http | mock
    endpoint: str | None = None
    model: str = "default"
    transcript: str | None = None
    max_tokens: int = DEFAULT_MAX_TOKENS
    temperature: float = 0.0
    seed: int | None = None


@dataclass
class AppConfig:
    kgs: list[KGConfig] = field(default_factory=list)
    llm: LlmConfig | None = None
    judge: LlmConfig | None = None
    gnn_endpoint: str | None = None
    caps: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_CAPS))
    top_k: int = 3
    concurrency: int = DEFAULT_CONCURRENCY
    base_dir: Path = field(default_factory=Path)


def _llm_config(section: dict | None) -> LlmConfig | None:
    if not section:
        return None
    return LlmConfig(
        mode=section.get("mode", "http"),
        endpoint=section.get("endpoint"),
        model=section.get("model", "default"),
        transcript=section.get("transcript"),
        max_tokens=int(section.get("max_tokens", DEFAULT_MAX_TOKENS)),
        temperature=float(section.get("temperature", 0.0)),
        seed=section.get("seed"),
    )


def load_config(path: str | Path) -> AppConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    kgs = [
        KGConfig(
            name=name,
            triples=kg.get("triples"),
            format=kg.get("format", "ntriples"),
            prefix=kg.get("prefix", ""),
            description=kg.get("description", ""),
            typing_predicate=kg.get("typing_predicate"),
            sparql_endpoint=kg.get("sparql_endpoint"),
        )
        for name, kg in (data.get("kgs") or {}).items()
    ]
    caps = dict(DEFAULT_CAPS)
    caps.update({str(k): int(v) for k, v in (data.get("caps") or {}).items()})
    return AppConfig(
        kgs=kgs,
        llm=_llm_config(data.get("llm")),
        judge=_llm_config(data.get("judge")),
        gnn_endpoint=(data.get("gnn") or {}).get("endpoint"),
        caps=caps,
        top_k=int(data.get("top_k", 3)),
        concurrency=int(data.get("concurrency", DEFAULT_CONCURRENCY)),
        base_dir=path.parent,
    )


def _build_session(cfg: LlmConfig | None, base_dir: Path) -> LlmSession | None:
    if cfg is None:
        return None
    if cfg.mode == "mock":
        if not cfg.transcript:
            raise ConfigError("mock LLM requires a transcript path")
        gateway = MockChatGateway.from_file(base_dir / cfg.transcript)
    elif cfg.mode == "http":
        gateway = HttpChatGateway(endpoint=cfg.endpoint)
    else:
        raise ConfigError(f"unknown llm mode {cfg.mode!r}")
    return LlmSession(
        gateway=gateway,
        model_id=cfg.model,
        temperature=cfg.temperature,
        max_tokens=cfg.max_tokens,
        seed=cfg.seed,
    )


def load_kg(cfg: KGConfig, base_dir: Path) -> KnowledgeGraph:
    if not cfg.triples:
        raise ConfigError(
            f"KG {cfg.name!r} declares no triples file; remote SPARQL endpoints are "
            "queryable via glowqa.sparql.execute_remote but the pipeline needs a local store"
        )
    path = base_dir / cfg.triples
    store = load_triples(
        path.read_bytes(),
        format=cfg.format,  # type: ignore[arg-type]
        typing_predicate=cfg.typing_predicate,
    )
    schema = extract_schema(store, cfg.prefix)
    return KnowledgeGraph(
        name=cfg.name,
        store=store,
        schema=schema,
        description=cfg.description or cfg.name,
    )


def build_engine(config: AppConfig) -> Engine:
    kgs = {cfg.name: load_kg(cfg, config.base_dir) for cfg in config.kgs}
    return Engine(
        kgs=kgs,
        llm=_build_session(config.llm, config.base_dir),
        judge_llm=_build_session(config.judge, config.base_dir),
        gnn=GnnClient(config.gnn_endpoint) if config.gnn_endpoint else None,
        caps=config.caps,
        top_k=config.top_k,
        concurrency=config.concurrency,
    )


def engine_from_file(path: str | Path) -> Engine:
    return build_engine(load_config(path))
