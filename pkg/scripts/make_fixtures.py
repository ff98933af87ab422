#!/usr/bin/env python3
"""Regenerate committed test fixtures and golden snapshots.

Everything here is deterministic (no wall clock, no unseeded RNG), so
reruns reproduce the committed files byte-for-byte. Run from anywhere:

    python3 scripts/make_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "tests" / "fixtures"
UI_FIXTURES = ROOT / "frontend" / "test" / "fixtures"

from benchaudit.anchors import AnchorStrategy, translate_corpus_to_shorthand
from benchaudit.corpus import attach_shorthands, ingest_corpus, load_model_runs, load_use_cases
from benchaudit.gateways import CompletionGateway, EmbeddingGateway, GatewayConfig
from benchaudit.pipeline import AuditPipeline
from benchaudit.retrieval import build_dense_index, build_lexical_index
from benchaudit.service import create_app

VERBS = ["reverse", "filter", "sort", "merge", "split", "parse", "hash", "cache", "batch", "trim"]
NOUNS = ["list", "string", "queue", "matrix", "buffer", "record", "stream", "tuple", "graph", "table"]
PLACES = ["rome", "persia", "carthage", "byzantium", "gaul", "egypt", "sparta", "babylon"]
THEMES = [
    "lighthouse keepers",
    "desert caravans",
    "midnight trains",
    "forgotten libraries",
    "tidal islands",
    "mountain observatories",
    "clockwork gardens",
    "river ferrymen",
]


def corpus_records() -> list[dict]:
    records = []
    for i in range(60):
        records.append(
            {
                "id": f"pycode-{i:04d}",
                "benchmark": "pycode",
                "text": (
                    f"python scripting exercises task {i}: "
                    f"{VERBS[i % 10]} the {NOUNS[(i * 3) % 10]} with a helper function"
                ),
                "answer": "",
                "metric": "accuracy",
                "tags": ["code"],
            }
        )
    for i in range(6):
        records.append(
            {
                "id": f"gocode-{i:04d}",
                "benchmark": "gocode",
                "text": (
                    f"golang concurrency exercises task {i}: "
                    f"{VERBS[i % 10]} the {NOUNS[(i * 7) % 10]} across worker channels"
                ),
                "answer": "",
                "metric": "accuracy",
                "tags": ["code"],
            }
        )
    for i in range(50):
        a, b, c = 2 + i % 7, 1 + i % 5, 3 + i % 11
        records.append(
            {
                "id": f"algebra-{i:04d}",
                "benchmark": "algebra",
                "text": f"equation solving drill {i}: solve for x when {a}x plus {b} equals {c}",
                "answer": f"x = ({c} - {b}) / {a}",
                "metric": "exact_match",
                "tags": ["math"],
            }
        )
    for i in range(44):
        records.append(
            {
                "id": f"trivia-{i:04d}",
                "benchmark": "trivia",
                "text": (
                    f"history trivia question {i}: which ruler governed "
                    f"{PLACES[i % 8]} during era {i % 5}"
                ),
                "answer": "",
                "metric": "accuracy",
                "tags": ["history"],
            }
        )
    for i in range(40):
        records.append(
            {
                "id": f"writing-{i:04d}",
                "benchmark": "writing",
                "text": (
                    f"creative writing prompt {i}: compose a short story about "
                    f"{THEMES[i % 8]} in two paragraphs"
                ),
                "answer": "",
                "metric": "win_rate",
                "tags": ["writing"],
            }
        )
    assert len(records) == 200
    return records


USE_CASES = [
    {
        "id": "uc-python",
        "text": "python scripting exercises",
        "category": "custom",
        "facet_family": "coding",
        "facet_axis": "language",
        "facet_value": "python",
    },
    {
        "id": "uc-go",
        "text": "golang concurrency exercises",
        "category": "custom",
        "facet_family": "coding",
        "facet_axis": "language",
        "facet_value": "golang",
    },
    {
        "id": "uc-algebra",
        "text": "equation solving drill",
        "category": "known_validation",
        "gold_benchmark": "algebra",
    },
    {"id": "uc-trivia", "text": "history trivia", "category": "topics"},
]


def run_records() -> list[dict]:
    # planted abilities over the algebra gold set: model_a ~0.9, model_b ~0.1
    records = []
    for i in range(50):
        item_id = f"algebra-{i:04d}"
        records.append(
            {
                "model": "model_a",
                "benchmark": "algebra",
                "item_id": item_id,
                "score": 0.0 if i % 10 == 9 else 1.0,
            }
        )
        records.append(
            {
                "model": "model_b",
                "benchmark": "algebra",
                "item_id": item_id,
                "score": 1.0 if i % 10 == 9 else 0.0,
            }
        )
    return records


RETRIEVED = [
    {"model": "model_a", "item_ids": [f"algebra-{i:04d}" for i in range(20)]},
    {"model": "model_b", "item_ids": [f"algebra-{i:04d}" for i in range(20)]},
]

TABLE5_FACETS = [
    ("Python", 0.867),
    ("C++", 0.741),
    ("Rust", 0.478),
    ("JavaScript", 0.346),
    ("Java", 0.286),
    ("Go", 0.100),
]


def write_jsonl(path: Path, records: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", "utf-8")


def snapshot(response) -> dict:
    return {
        "strategy": response.strategy.value,
        "anchors": list(response.anchors),
        "hits": [
            {
                "rank": j.hit.rank,
                "item_id": j.item_id,
                "benchmark": j.benchmark_id,
                "score": round(j.hit.score, 9),
                "selection": j.selection,
                "label": j.label.value if j.label else None,
            }
            for j in response.hits
        ],
        "summary": {
            "method_precision": response.summary.method_precision,
            "system_precision": response.summary.system_precision,
            "judged": response.summary.judged,
            "failed": response.summary.failed,
        },
    }


def main() -> int:
    write_jsonl(FIXTURES / "corpus_200.jsonl", corpus_records())
    write_jsonl(FIXTURES / "use_cases.jsonl", USE_CASES)
    write_jsonl(FIXTURES / "runs_algebra.jsonl", run_records())
    write_jsonl(FIXTURES / "retrieved_algebra.jsonl", RETRIEVED)

    corpus = ingest_corpus(FIXTURES / "corpus_200.jsonl")
    lm = CompletionGateway(GatewayConfig(mode="stub"))
    embedder = EmbeddingGateway(GatewayConfig(mode="stub"))

    translation = translate_corpus_to_shorthand(corpus, lm)
    assert not translation.rejects
    write_jsonl(
        FIXTURES / "shorthands_200.jsonl",
        [{"id": item.item_id, "shorthand": translation.mapping[item.item_id]} for item in corpus],
    )
    corpus = attach_shorthands(corpus, translation.mapping)

    pipeline = AuditPipeline(
        corpus=corpus,
        lm=lm,
        embedder=embedder,
        dense_raw=build_dense_index(corpus, embedder, space="raw"),
        dense_shorthand=build_dense_index(corpus, embedder, space="shorthand"),
        lexical_raw=build_lexical_index(corpus),
        lexical_shorthand=build_lexical_index(corpus, space="shorthand"),
    )

    use_cases = {c.use_case_id: c for c in load_use_cases(FIXTURES / "use_cases.jsonl")}
    goldens = {}
    for strategy in AnchorStrategy:
        response = pipeline.query(use_cases["uc-python"], k=20, strategy=strategy)
        goldens[strategy.value] = snapshot(response)
    write_json(FIXTURES / "golden_queries.json", goldens)

    # ---- recorded stub-mode responses for the UI snapshot suite -------------
    from fastapi.testclient import TestClient

    runs = load_model_runs(FIXTURES / "runs_algebra.jsonl", corpus)
    app = create_app(pipeline, runs=runs, use_cases=use_cases, default_k=20)
    client = TestClient(app)

    query = client.post(
        "/v1/query",
        json={"use_case": "python scripting exercises", "k": 20, "strategy": "example_synthesis"},
    )
    query.raise_for_status()
    write_json(UI_FIXTURES / "query_response.json", query.json())

    empty = client.post(
        "/v1/query",
        json={"use_case": "qqqqzz wwxxyy", "k": 5, "strategy": "original"},
    )
    empty.raise_for_status()
    write_json(UI_FIXTURES / "query_empty.json", empty.json())

    # a query whose token overlap spans several benchmarks, for group rendering
    mixed = client.post(
        "/v1/query",
        json={"use_case": "exercises drill question", "k": 20, "strategy": "original"},
    )
    mixed.raise_for_status()
    assert len({h["benchmark"] for h in mixed.json()["hits"]}) >= 3
    write_json(UI_FIXTURES / "query_mixed.json", mixed.json())

    facets = client.post(
        "/v1/audit/facets",
        json={
            "family": {
                "family_id": "coding",
                "base_capability": "coding exercises",
                "axis": "language",
                "facets": [
                    {"value": "python", "text": "python scripting exercises"},
                    {"value": "golang", "text": "golang concurrency exercises"},
                ],
            },
            "k": 20,
        },
    )
    facets.raise_for_status()
    write_json(UI_FIXTURES / "facet_report.json", facets.json())

    write_json(
        UI_FIXTURES / "facet_report_table5.json",
        {
            "family_id": "code-generation",
            "axis": "programming language",
            "per_facet": {
                name: {
                    "relevant_fraction": fraction,
                    "retrieved_count": 1000,
                    "relevant_count": int(round(fraction * 1000)),
                    "error": None,
                }
                for name, fraction in TABLE5_FACETS
            },
            "spread": 0.767,
            "chart": [{"facet": name, "fraction": fraction} for name, fraction in TABLE5_FACETS],
        },
    )

    convergence = client.post(
        "/v1/audit/convergence",
        json={
            "use_case_id": "uc-algebra",
            "retrieved": {r["model"]: r["item_ids"] for r in RETRIEVED},
            "trials": 50,
            "seed": 7,
        },
    )
    convergence.raise_for_status()
    write_json(UI_FIXTURES / "convergence_report.json", convergence.json())

    benchmarks = client.get("/v1/benchmarks")
    benchmarks.raise_for_status()
    write_json(UI_FIXTURES / "benchmarks.json", benchmarks.json())

    print(f"fixtures written under {FIXTURES} and {UI_FIXTURES}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
