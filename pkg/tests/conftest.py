from __future__ import annotations

import json
from pathlib import Path

import pytest

from benchaudit.corpus import BenchmarkItem, Corpus, MetricKind
from benchaudit.gateways import CompletionGateway, EmbeddingGateway, GatewayConfig

FIXTURES = Path(__file__).parent / "fixtures"


def make_corpus(texts: list[str], benchmark: str = "bench", metric: str = "accuracy") -> Corpus:
    return Corpus(
        BenchmarkItem(
            item_id=f"{benchmark}-{i:04d}",
            benchmark_id=benchmark,
            text=text,
            metric_kind=MetricKind(metric),
        )
        for i, text in enumerate(texts)
    )


def write_jsonl(path: Path, records: list[dict]) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    return path


@pytest.fixture
def stub_lm() -> CompletionGateway:
    return CompletionGateway(GatewayConfig(mode="stub"))


@pytest.fixture
def stub_embedder() -> EmbeddingGateway:
    return EmbeddingGateway(GatewayConfig(mode="stub"))


@pytest.fixture(scope="session")
def fixture_corpus_path() -> Path:
    return FIXTURES / "corpus_200.jsonl"


@pytest.fixture(scope="session")
def fixture_pipeline():
    """Stub-mode pipeline over the committed 200-item corpus, all indexes built."""
    from benchaudit.config import load_shorthand_table
    from benchaudit.corpus import attach_shorthands, ingest_corpus
    from benchaudit.pipeline import AuditPipeline
    from benchaudit.retrieval import build_dense_index, build_lexical_index

    corpus = ingest_corpus(FIXTURES / "corpus_200.jsonl")
    corpus = attach_shorthands(corpus, load_shorthand_table(FIXTURES / "shorthands_200.jsonl"))
    lm = CompletionGateway(GatewayConfig(mode="stub"))
    embedder = EmbeddingGateway(GatewayConfig(mode="stub"))
    return AuditPipeline(
        corpus=corpus,
        lm=lm,
        embedder=embedder,
        dense_raw=build_dense_index(corpus, embedder, space="raw"),
        dense_shorthand=build_dense_index(corpus, embedder, space="shorthand"),
        lexical_raw=build_lexical_index(corpus),
        lexical_shorthand=build_lexical_index(corpus, space="shorthand"),
    )
