"""Engine configuration file and pipeline assembly.

The config is a JSON object naming the corpus, optional sidecar and index
files, serving defaults (k, strategy, deadline), and the gateway settings.
BB_* environment variables override the gateway block.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .anchors import AnchorStrategy
from .corpus import (
    Corpus,
    ModelRunSet,
    UseCase,
    attach_shorthands,
    ingest_corpus,
    load_model_runs,
    load_use_cases,
)
from .gateways import CompletionGateway, EmbeddingGateway, GatewayConfig
from .pipeline import AuditPipeline
from .retrieval import (
    build_dense_index,
    build_lexical_index,
    load_dense_index,
    load_lexical_index,
)


@dataclass
class EngineConfig:
    corpus: str
    shorthand_table: str | None = None
    dense_index_raw: str | None = None
    dense_index_shorthand: str | None = None
    lexical_index_raw: str | None = None
    lexical_index_shorthand: str | None = None
    model_runs: str | None = None
    use_cases: str | None = None
    default_k: int = 20
    oversample: int = 1
    default_strategy: str = AnchorStrategy.EXAMPLE_SYNTHESIS.value
    request_deadline_s: float = 120.0
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    gateway: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path) -> "EngineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        base = Path(path).parent

        def resolve(value: str | None) -> str | None:
            if value is None:
                return None
            p = Path(value)
            return str(p if p.is_absolute() else base / p)

        indexes = raw.get("indexes", {})
        return cls(
            corpus=resolve(raw["corpus"]),
            shorthand_table=resolve(raw.get("shorthand_table")),
            dense_index_raw=resolve(indexes.get("dense_raw")),
            dense_index_shorthand=resolve(indexes.get("dense_shorthand")),
            lexical_index_raw=resolve(indexes.get("lexical_raw")),
            lexical_index_shorthand=resolve(indexes.get("lexical_shorthand")),
            model_runs=resolve(raw.get("model_runs")),
            use_cases=resolve(raw.get("use_cases")),
            default_k=int(raw.get("default_k", 20)),
            oversample=int(raw.get("oversample", 1)),
            default_strategy=raw.get("default_strategy", cls.default_strategy),
            request_deadline_s=float(raw.get("request_deadline_s", 120.0)),
            bm25_k1=float(raw.get("bm25_k1", 1.2)),
            bm25_b=float(raw.get("bm25_b", 0.75)),
            gateway=dict(raw.get("gateway", {})),
        )

    def gateway_config(self, kind: str) -> GatewayConfig:
        """Gateway settings with BB_* environment overrides applied."""
        block = self.gateway
        prefix = {"lm": "BB_LM", "embed": "BB_EMBED"}[kind]
        endpoint = os.environ.get(
            f"{prefix}_URL", block.get(f"{kind}_url") or block.get("url")
        )
        return GatewayConfig(
            mode=os.environ.get("BB_MODE", block.get("mode", "stub")),
            endpoint=endpoint,
            credential=os.environ.get(f"{prefix}_KEY", block.get(f"{kind}_key")),
            max_parallel=int(block.get("max_parallel", 8)),
            timeout=float(block.get("timeout", 30.0)),
            retries=int(block.get("retries", 3)),
            backoff=float(block.get("backoff", 0.25)),
            embed_dim=int(block.get("embed_dim", 256)),
            label=block.get("label", ""),
        )


def load_shorthand_table(path: str | Path) -> dict[str, str]:
    table: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            raw = raw.strip()
            if not raw:
                continue
            record = json.loads(raw)
            table[str(record["id"])] = str(record["shorthand"])
    return table


def build_pipeline(config: EngineConfig) -> AuditPipeline:
    """Assemble the pipeline, loading persisted indexes or building fresh ones."""
    corpus = ingest_corpus(config.corpus)
    if config.shorthand_table:
        corpus = attach_shorthands(corpus, load_shorthand_table(config.shorthand_table))
    lm = CompletionGateway(config.gateway_config("lm"))
    embedder = EmbeddingGateway(config.gateway_config("embed"))
    has_shorthands = all(item.shorthand is not None for item in corpus) and len(corpus) > 0

    def dense_for(space: str, path: str | None):
        if path and Path(path).exists():
            return load_dense_index(path, space=space)
        if space == "shorthand" and not has_shorthands:
            return None
        if len(corpus) == 0:
            return None
        return build_dense_index(corpus, embedder, space=space)

    def lexical_for(space: str, path: str | None):
        if path and Path(path).exists():
            return load_lexical_index(path, space=space)
        if space == "shorthand" and not has_shorthands:
            return None
        if len(corpus) == 0:
            return None
        return build_lexical_index(corpus, k1=config.bm25_k1, b=config.bm25_b, space=space)

    return AuditPipeline(
        corpus=corpus,
        lm=lm,
        embedder=embedder,
        dense_raw=dense_for("raw", config.dense_index_raw),
        dense_shorthand=dense_for("shorthand", config.dense_index_shorthand),
        lexical_raw=lexical_for("raw", config.lexical_index_raw),
        lexical_shorthand=lexical_for("shorthand", config.lexical_index_shorthand),
        oversample=config.oversample,
        deadline_seconds=config.request_deadline_s,
        default_strategy=AnchorStrategy(config.default_strategy),
    )


def load_runs_and_use_cases(
    config: EngineConfig, corpus: Corpus
) -> tuple[ModelRunSet | None, dict[str, UseCase]]:
    runs = load_model_runs(config.model_runs, corpus) if config.model_runs else None
    cases: dict[str, UseCase] = {}
    if config.use_cases:
        for case in load_use_cases(config.use_cases):
            cases[case.use_case_id] = case
    return runs, cases
