"""Query pipeline: anchor generation, retrieval, merging, judging, timing."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from .anchors import AnchorSet, AnchorStrategy, generate_anchors
from .corpus import Corpus, UseCase
from .errors import ArgumentError, GatewayError, StateError
from .gateways import CompletionGateway, EmbeddingGateway
from .judge import JudgedHit, filter_hits, judge_relevance
from .metrics import method_precision_at_k, system_precision_at_k
from .retrieval import (
    DenseIndex,
    LexicalIndex,
    RetrievalHit,
    merge_anchor_hits,
    random_baseline,
    search_dense,
    search_lexical,
)


@dataclass
class StageTimings:
    """Wall-clock milliseconds per pipeline stage; total includes overhead."""

    anchor_ms: float = 0.0
    embed_ms: float = 0.0
    search_ms: float = 0.0
    filter_ms: float = 0.0
    total_ms: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return {
            "anchor_ms": self.anchor_ms,
            "embed_ms": self.embed_ms,
            "search_ms": self.search_ms,
            "filter_ms": self.filter_ms,
            "total_ms": self.total_ms,
        }


@dataclass
class QuerySummary:
    """Server-side metric readout so clients never compute metrics locally."""

    k: int
    method_precision: float | None
    system_precision: float | None
    judged: int
    failed: int


@dataclass
class QueryResponse:
    use_case: str
    strategy: AnchorStrategy
    anchors: tuple[str, ...]
    hits: list[JudgedHit]
    timings: StageTimings
    summary: QuerySummary | None = None
    engine: str = "dense"


class _Deadline:
    def __init__(self, seconds: float | None):
        self.seconds = seconds
        self.start = time.perf_counter()

    def check(self, stage: str) -> None:
        if self.seconds is not None and time.perf_counter() - self.start > self.seconds:
            raise GatewayError(f"deadline of {self.seconds}s exceeded during {stage}")


@dataclass
class AuditPipeline:
    """Shared immutable corpus/indexes plus the two gateways.

    Indexes are optional; a query fails with ``StateError`` when it needs one
    that was never built.
    """

    corpus: Corpus
    lm: CompletionGateway
    embedder: EmbeddingGateway
    dense_raw: DenseIndex | None = None
    dense_shorthand: DenseIndex | None = None
    lexical_raw: LexicalIndex | None = None
    lexical_shorthand: LexicalIndex | None = None
    oversample: int = 1
    deadline_seconds: float | None = 120.0
    default_strategy: AnchorStrategy = AnchorStrategy.EXAMPLE_SYNTHESIS

    def _dense_index(self, space: str) -> DenseIndex:
        index = self.dense_raw if space == "raw" else self.dense_shorthand
        if index is None:
            raise StateError(f"dense index for space {space!r} is not built")
        return index

    def _lexical_index(self, space: str) -> LexicalIndex:
        index = self.lexical_raw if space == "raw" else self.lexical_shorthand
        if index is None:
            raise StateError(f"lexical index for space {space!r} is not built")
        return index

    def query(
        self,
        use_case: UseCase | str,
        k: int,
        strategy: AnchorStrategy | str | None = None,
        apply_filter: bool = True,
        engine: str = "dense",
        seed: int = 0,
    ) -> QueryResponse:
        """Run anchor -> retrieve -> merge -> (filter + judge) for one use-case."""
        if k < 1:
            raise ArgumentError("k must be >= 1")
        if engine not in ("dense", "lexical", "random"):
            raise ArgumentError(f"unknown engine {engine!r}")
        if isinstance(use_case, str):
            use_case = UseCase(use_case_id="adhoc", text=use_case)
        strategy = AnchorStrategy(strategy) if strategy else self.default_strategy
        deadline = _Deadline(self.deadline_seconds)
        timings = StageTimings()
        t_start = time.perf_counter()

        t0 = time.perf_counter()
        anchor_set = generate_anchors(use_case, strategy, self.lm)
        timings.anchor_ms = (time.perf_counter() - t0) * 1000.0
        deadline.check("anchor generation")

        per_anchor_k = k * max(1, self.oversample)
        if engine == "random":
            timings.embed_ms = 0.0
            t0 = time.perf_counter()
            merged = random_baseline(self.corpus, min(per_anchor_k, len(self.corpus)), seed)[:k]
            timings.search_ms = (time.perf_counter() - t0) * 1000.0
        elif engine == "lexical":
            index = self._lexical_index(anchor_set.target_space)
            timings.embed_ms = 0.0
            t0 = time.perf_counter()
            per_anchor = [
                search_lexical(index, anchor, per_anchor_k, anchor_index=i)
                for i, anchor in enumerate(anchor_set.anchors)
            ]
            merged = merge_anchor_hits(per_anchor, k)
            timings.search_ms = (time.perf_counter() - t0) * 1000.0
        else:
            index = self._dense_index(anchor_set.target_space)
            t0 = time.perf_counter()
            vectors = self.embedder.embed(list(anchor_set.anchors))
            timings.embed_ms = (time.perf_counter() - t0) * 1000.0
            deadline.check("embedding")
            t0 = time.perf_counter()
            per_anchor = [
                search_dense(index, vectors[i], per_anchor_k, anchor_index=i)
                for i in range(len(anchor_set.anchors))
            ]
            merged = merge_anchor_hits(per_anchor, k)
            timings.search_ms = (time.perf_counter() - t0) * 1000.0
        deadline.check("search")

        summary: QuerySummary | None = None
        if apply_filter:
            t0 = time.perf_counter()
            filtered = filter_hits(use_case, merged, self.corpus, self.lm)
            judged = judge_relevance(use_case, filtered.kept, self.corpus, self.lm)
            timings.filter_ms = (time.perf_counter() - t0) * 1000.0
            deadline.check("filtering")
            selections = [
                j.selection for j in filtered.judged if not j.judge_failed
            ]
            labels = [j.label for j in judged if not j.judge_failed and j.label is not None]
            summary = QuerySummary(
                k=k,
                method_precision=method_precision_at_k(selections, k),
                system_precision=system_precision_at_k(labels, k),
                judged=len(labels),
                failed=len(filtered.failed)
                + sum(1 for j in judged if j.judge_failed),
            )
            hits = judged
        else:
            hits = [
                JudgedHit(hit=h, benchmark_id=self.corpus.get(h.item_id).benchmark_id)
                for h in merged
            ]
            timings.filter_ms = 0.0

        timings.total_ms = (time.perf_counter() - t_start) * 1000.0
        return QueryResponse(
            use_case=use_case.text,
            strategy=strategy,
            anchors=anchor_set.anchors,
            hits=hits,
            timings=timings,
            summary=summary,
            engine=engine,
        )

    def judged_hits(self, use_case: UseCase, k: int) -> list[JudgedHit]:
        """Filtered and graded hits for a use-case (facet-audit entry point)."""
        return self.query(use_case, k, apply_filter=True).hits
