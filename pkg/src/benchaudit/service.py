"""HTTP service over the pipeline and the two validity audits.

Endpoints: POST /v1/query, POST /v1/audit/facets, POST /v1/audit/convergence,
GET /v1/benchmarks, GET /healthz. All reads go against immutable indexes, so
identical stub-mode requests return identical bodies.
"""

from __future__ import annotations

import math
from typing import Any

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .anchors import AnchorStrategy
from .corpus import ModelRunSet, UseCase, UseCaseCategory
from .errors import ArgumentError, BenchAuditError, GatewayError, StateError
from .judge import serialize_judged
from .pipeline import AuditPipeline, QueryResponse
from .retrieval import BACKEND
from .validity import (
    RankAgreementReport,
    SkillFamily,
    facet_coverage,
    rank_divergence,
    tau_gold,
    tau_ret,
    tau_sanity,
)


class QueryRequest(BaseModel):
    use_case: str
    k: int | None = None
    strategy: str | None = None
    filter: bool = True
    engine: str = "dense"
    seed: int = 0


class FacetSpec(BaseModel):
    value: str
    text: str
    id: str | None = None


class FamilySpec(BaseModel):
    family_id: str
    base_capability: str = ""
    axis: str = ""
    facets: list[FacetSpec] = Field(default_factory=list)


class FacetAuditRequest(BaseModel):
    family: FamilySpec
    k: int | None = None


class ConvergenceRequest(BaseModel):
    use_case_id: str
    retrieved: dict[str, list[str]]
    trials: int = 50
    seed: int = 0
    shared: bool = False


def _query_payload(response: QueryResponse, pipeline: AuditPipeline) -> dict[str, Any]:
    hits = []
    for judged in response.hits:
        record = serialize_judged(judged)
        record["rank"] = judged.hit.rank
        record["anchor_index"] = judged.hit.anchor_index
        record["text"] = pipeline.corpus.get(judged.item_id).text
        hits.append(record)
    payload: dict[str, Any] = {
        "use_case": response.use_case,
        "strategy": response.strategy.value,
        "engine": response.engine,
        "anchors": list(response.anchors),
        "hits": hits,
        "timings": response.timings.as_dict(),
    }
    if response.summary is not None:
        payload["summary"] = {
            "k": response.summary.k,
            "method_precision": response.summary.method_precision,
            "system_precision": response.summary.system_precision,
            "judged": response.summary.judged,
            "failed": response.summary.failed,
        }
    return payload


def report_payload(report: RankAgreementReport) -> dict[str, Any]:
    return {
        "use_case_id": report.use_case_id,
        "tau_ret": report.tau_ret,
        "tau_gold": report.tau_gold,
        "tau_sanity": report.tau_sanity,
        "delta": report.delta,
        "trials": report.trials,
        "seed": report.seed,
        "retrieved_size": report.retrieved_size,
        "gold_size": report.gold_size,
        "skipped_trials": report.skipped_trials,
    }


def compute_convergence(
    pipeline: AuditPipeline,
    runs: ModelRunSet,
    use_case: UseCase,
    retrieved: dict[str, list[str]],
    trials: int,
    seed: int,
    shared: bool = False,
) -> RankAgreementReport:
    """Shared implementation behind the endpoint and the CLI."""
    if use_case.gold_benchmark_id is None:
        raise ArgumentError(f"use case {use_case.use_case_id!r} has no gold benchmark")
    gold = [
        item.item_id
        for item in pipeline.corpus
        if item.benchmark_id == use_case.gold_benchmark_id
    ]
    if not gold:
        raise ArgumentError(
            f"gold benchmark {use_case.gold_benchmark_id!r} has no items in the corpus"
        )
    sizes = [len(set(ids)) for ids in retrieved.values()]
    if not sizes:
        raise ArgumentError("retrieved sets must be non-empty")
    subsample = max(2, math.floor(sum(sizes) / len(sizes)))
    ret = tau_ret(runs, retrieved, gold, trials=trials, seed=seed, shared=shared)
    gld = tau_gold(runs, gold, subsample, trials=trials, seed=seed, shared=shared)
    sanity = tau_sanity(runs, gold, subsample, trials=trials, seed=seed, shared=shared)
    return RankAgreementReport(
        use_case_id=use_case.use_case_id,
        tau_ret=ret.value,
        tau_gold=gld.value,
        tau_sanity=sanity.value,
        delta=rank_divergence(gld.value, ret.value),
        trials=trials,
        seed=seed,
        retrieved_size=subsample,
        gold_size=len(gold),
        skipped_trials=ret.skipped + gld.skipped + sanity.skipped,
    )


def create_app(
    pipeline: AuditPipeline,
    runs: ModelRunSet | None = None,
    use_cases: dict[str, UseCase] | None = None,
    default_k: int = 20,
) -> FastAPI:
    app = FastAPI(title="benchaudit", version="0.1.0")
    use_cases = use_cases or {}

    @app.get("/healthz")
    def healthz() -> dict[str, Any]:
        return {"status": "ok", "items": len(pipeline.corpus), "kernel": BACKEND}

    @app.get("/v1/benchmarks")
    def benchmarks() -> dict[str, Any]:
        return {
            "benchmarks": [
                {
                    "benchmark_id": b.benchmark_id,
                    "name": b.name,
                    "metric_kind": b.metric_kind.value,
                    "item_count": b.item_count,
                }
                for b in sorted(
                    pipeline.corpus.benchmarks.values(), key=lambda b: b.benchmark_id
                )
            ]
        }

    @app.post("/v1/query")
    def query(request: QueryRequest) -> dict[str, Any]:
        k = request.k if request.k is not None else default_k
        if k < 1:
            raise HTTPException(status_code=400, detail="k must be >= 1")
        try:
            strategy = AnchorStrategy(request.strategy) if request.strategy else None
        except ValueError:
            raise HTTPException(
                status_code=400, detail=f"unknown strategy {request.strategy!r}"
            ) from None
        try:
            response = pipeline.query(
                request.use_case,
                k,
                strategy=strategy,
                apply_filter=request.filter,
                engine=request.engine,
                seed=request.seed,
            )
        except GatewayError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from None
        except (ArgumentError, StateError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return _query_payload(response, pipeline)

    @app.post("/v1/audit/facets")
    def audit_facets(request: FacetAuditRequest) -> dict[str, Any]:
        k = request.k if request.k is not None else default_k
        try:
            facets = tuple(
                (
                    f.value,
                    UseCase(
                        use_case_id=f.id or f"{request.family.family_id}:{f.value}",
                        text=f.text,
                        category=UseCaseCategory.CUSTOM,
                    ),
                )
                for f in request.family.facets
            )
            family = SkillFamily(
                family_id=request.family.family_id,
                base_capability=request.family.base_capability,
                axis=request.family.axis,
                facets=facets,
            )
            report = facet_coverage(family, pipeline, k)
        except GatewayError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from None
        except (ArgumentError, StateError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return {
            "family_id": report.family_id,
            "axis": report.axis,
            "per_facet": {
                facet: {
                    "relevant_fraction": entry.relevant_fraction,
                    "retrieved_count": entry.retrieved_count,
                    "relevant_count": entry.relevant_count,
                    "error": entry.error,
                }
                for facet, entry in report.per_facet.items()
            },
            "spread": report.spread,
            "chart": report.chart(),
        }

    @app.post("/v1/audit/convergence")
    def audit_convergence(request: ConvergenceRequest) -> dict[str, Any]:
        if runs is None:
            raise HTTPException(status_code=422, detail="no model runs loaded")
        use_case = use_cases.get(request.use_case_id)
        if use_case is None:
            raise HTTPException(
                status_code=422, detail=f"unknown use case {request.use_case_id!r}"
            )
        try:
            report = compute_convergence(
                pipeline,
                runs,
                use_case,
                request.retrieved,
                trials=request.trials,
                seed=request.seed,
                shared=request.shared,
            )
        except (ArgumentError, KeyError, BenchAuditError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return report_payload(report)

    return app
