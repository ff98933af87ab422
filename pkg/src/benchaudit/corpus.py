"""Benchmark corpus: ingestion, validation, and persistence.

A corpus is the immutable database of benchmark items the whole engine
retrieves from. Files are line-delimited JSON records (see ``ingest_corpus``
and ``load_model_runs`` for the field lists).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .anchors import validate_shorthand
from .errors import (
    ArgumentError,
    CapacityError,
    CoverageError,
    DimensionError,
    FormatError,
    IngestError,
    RangeError,
)


class MetricKind(str, Enum):
    ACCURACY = "accuracy"
    EXACT_MATCH = "exact_match"
    F1 = "f1"
    WIN_RATE = "win_rate"
    PRECOMPUTED = "precomputed"


class UseCaseCategory(str, Enum):
    TOPICS = "topics"
    SKILLS = "skills"
    APPLICATIONS = "applications"
    KNOWN_VALIDATION = "known_validation"
    NOVEL = "novel"
    CUSTOM = "custom"


@dataclass(frozen=True)
class BenchmarkItem:
    """One evaluation example from a source benchmark."""

    item_id: str
    benchmark_id: str
    text: str
    answer: str = ""
    metric_kind: MetricKind = MetricKind.ACCURACY
    shorthand: str | None = None
    tags: tuple[str, ...] = ()


@dataclass(frozen=True)
class Benchmark:
    benchmark_id: str
    name: str
    metric_kind: MetricKind
    item_count: int


@dataclass(frozen=True)
class UseCase:
    """A practitioner's natural-language description of what to audit."""

    use_case_id: str
    text: str
    category: UseCaseCategory = UseCaseCategory.CUSTOM
    gold_benchmark_id: str | None = None
    facet_family: str | None = None
    facet_axis: str | None = None
    facet_value: str | None = None

    def __post_init__(self):
        if self.category is UseCaseCategory.KNOWN_VALIDATION and not self.gold_benchmark_id:
            raise ArgumentError(
                f"use case {self.use_case_id!r}: known_validation requires a gold benchmark"
            )
        facet = (self.facet_family, self.facet_axis, self.facet_value)
        if any(f is not None for f in facet) and not all(f is not None for f in facet):
            raise ArgumentError(
                f"use case {self.use_case_id!r}: facet fields must all be present or all absent"
            )


class Corpus:
    """Immutable ordered collection of benchmark items with derived summaries."""

    def __init__(self, items: Iterable[BenchmarkItem]):
        self._items: list[BenchmarkItem] = list(items)
        self._pos: dict[str, int] = {}
        for pos, item in enumerate(self._items):
            if item.item_id in self._pos:
                raise IngestError("duplicate", f"item_id {item.item_id!r} repeated")
            if not item.text:
                raise IngestError("parse", f"item {item.item_id!r} has empty text")
            self._pos[item.item_id] = pos
        self._benchmarks: dict[str, Benchmark] = {}
        kinds: dict[str, MetricKind] = {}
        counts: dict[str, int] = {}
        for item in self._items:
            bid = item.benchmark_id
            if bid in kinds and kinds[bid] is not item.metric_kind:
                raise IngestError(
                    "metric",
                    f"benchmark {bid!r} mixes metric kinds "
                    f"{kinds[bid].value!r} and {item.metric_kind.value!r}",
                )
            kinds[bid] = item.metric_kind
            counts[bid] = counts.get(bid, 0) + 1
        for bid in counts:
            self._benchmarks[bid] = Benchmark(bid, bid, kinds[bid], counts[bid])

    @property
    def items(self) -> list[BenchmarkItem]:
        return list(self._items)

    @property
    def benchmarks(self) -> dict[str, Benchmark]:
        return dict(self._benchmarks)

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[BenchmarkItem]:
        return iter(self._items)

    def __contains__(self, item_id: str) -> bool:
        return item_id in self._pos

    def get(self, item_id: str) -> BenchmarkItem:
        return self._items[self._pos[item_id]]

    def position(self, item_id: str) -> int:
        """Ingestion-order position of an item (stable row index for indexes)."""
        return self._pos[item_id]

    def id_ranks(self) -> np.ndarray:
        """Rank of each item's id in lexicographic order, by corpus position.

        Search code breaks score ties by ascending item_id; comparing these
        integer ranks is equivalent and cheap inside kernels.
        """
        order = sorted(range(len(self._items)), key=lambda i: self._items[i].item_id)
        ranks = np.empty(len(self._items), dtype=np.int64)
        for rank, pos in enumerate(order):
            ranks[pos] = rank
        return ranks

    def dump(self, path: str | Path) -> None:
        """Write the corpus back out in the ingestion line format."""
        with open(path, "w", encoding="utf-8") as fh:
            for item in self._items:
                record = {
                    "id": item.item_id,
                    "benchmark": item.benchmark_id,
                    "text": item.text,
                    "answer": item.answer,
                    "metric": item.metric_kind.value,
                    "tags": list(item.tags),
                }
                if item.shorthand is not None:
                    record["shorthand"] = item.shorthand
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def _parse_item(record: dict, line: int) -> BenchmarkItem:
    try:
        item_id = record["id"]
        benchmark_id = record["benchmark"]
        text = record["text"]
        metric = record["metric"]
    except KeyError as exc:
        raise IngestError("parse", f"missing field {exc.args[0]!r}", line) from None
    try:
        kind = MetricKind(metric)
    except ValueError:
        raise IngestError("metric", f"unknown metric kind {metric!r}", line) from None
    shorthand = record.get("shorthand")
    if shorthand is not None:
        try:
            validate_shorthand(shorthand)
        except FormatError as exc:
            raise IngestError("parse", f"invalid shorthand: {exc}", line) from None
    if not isinstance(text, str) or not text:
        raise IngestError("parse", "text must be a non-empty string", line)
    return BenchmarkItem(
        item_id=str(item_id),
        benchmark_id=str(benchmark_id),
        text=text,
        answer=str(record.get("answer", "")),
        metric_kind=kind,
        shorthand=shorthand,
        tags=tuple(record.get("tags", ())),
    )


def ingest_corpus(path: str | Path, expect_unique: bool = True) -> Corpus:
    """Read a line-delimited corpus file.

    Each line is a JSON record with fields
    ``{id, benchmark, text, answer, metric, tags[], shorthand?}``. With
    ``expect_unique`` a repeated ``id`` raises; otherwise the first
    occurrence wins.
    """
    items: list[BenchmarkItem] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise IngestError("parse", f"malformed record: {exc.msg}", line_no) from None
            if not isinstance(record, dict):
                raise IngestError("parse", "record is not an object", line_no)
            item = _parse_item(record, line_no)
            if item.item_id in seen:
                if expect_unique:
                    raise IngestError("duplicate", f"item_id {item.item_id!r} repeated", line_no)
                continue
            seen.add(item.item_id)
            items.append(item)
    return Corpus(items)


def attach_shorthands(corpus: Corpus, table: Mapping[str, str]) -> Corpus:
    """Return a new corpus with shorthand annotations from ``table`` applied.

    Raises ``KeyError`` for unknown item ids and ``FormatError`` for values
    that fail the shorthand grammar; unmapped items are carried over as-is.
    """
    for item_id, shorthand in table.items():
        if item_id not in corpus:
            raise KeyError(item_id)
        validate_shorthand(shorthand)
    items = [
        replace(item, shorthand=table[item.item_id]) if item.item_id in table else item
        for item in corpus
    ]
    return Corpus(items)


class ModelRunSet:
    """Per-(model, item) success scores in [0, 1] for a set of models."""

    def __init__(self, scores: Mapping[tuple[str, str], float], corpus: Corpus):
        self._scores: dict[tuple[str, str], float] = {}
        per_model_items: dict[str, set[str]] = {}
        for (model_id, item_id), value in scores.items():
            if not (0.0 <= value <= 1.0):
                raise RangeError(f"score {value} for ({model_id}, {item_id}) outside [0, 1]")
            if item_id not in corpus:
                raise KeyError(item_id)
            self._scores[(model_id, item_id)] = float(value)
            per_model_items.setdefault(model_id, set()).add(item_id)
        self.model_ids: tuple[str, ...] = tuple(sorted(per_model_items))
        # each model that touches a benchmark must cover the same items of it
        per_bench: dict[str, dict[str, set[str]]] = {}
        for (model_id, item_id) in self._scores:
            bid = corpus.get(item_id).benchmark_id
            per_bench.setdefault(bid, {}).setdefault(model_id, set()).add(item_id)
        for bid, by_model in per_bench.items():
            reference: set[str] | None = None
            for model_id in sorted(by_model):
                if reference is None:
                    reference = by_model[model_id]
                elif by_model[model_id] != reference:
                    raise CoverageError(
                        f"benchmark {bid!r}: model {model_id!r} covers "
                        f"{len(by_model[model_id])} items, expected {len(reference)}"
                    )

    def score(self, model_id: str, item_id: str) -> float:
        return self._scores[(model_id, item_id)]

    def items_for(self, model_id: str) -> set[str]:
        return {i for (m, i) in self._scores if m == model_id}

    @property
    def scores(self) -> dict[tuple[str, str], float]:
        return dict(self._scores)


def load_model_runs(path: str | Path, corpus: Corpus) -> ModelRunSet:
    """Read a model-run file of lines ``{model, benchmark, item_id, score}``."""
    scores: dict[tuple[str, str], float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                record = json.loads(raw)
                model_id = record["model"]
                item_id = record["item_id"]
                value = float(record["score"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise IngestError("parse", f"malformed run record: {exc}", line_no) from None
            key = (str(model_id), str(item_id))
            if key in scores:
                raise IngestError("duplicate", f"repeated score for {key}", line_no)
            scores[key] = value
    return ModelRunSet(scores, corpus)


def load_use_cases(path: str | Path) -> list[UseCase]:
    """Read a use-case file of lines
    ``{id, text, category, gold_benchmark?, facet_family?, facet_axis?, facet_value?}``.
    """
    out: list[UseCase] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                record = json.loads(raw)
                use_case = UseCase(
                    use_case_id=str(record["id"]),
                    text=str(record["text"]),
                    category=UseCaseCategory(record.get("category", "custom")),
                    gold_benchmark_id=record.get("gold_benchmark"),
                    facet_family=record.get("facet_family"),
                    facet_axis=record.get("facet_axis"),
                    facet_value=record.get("facet_value"),
                )
            except (json.JSONDecodeError, KeyError, ValueError, ArgumentError) as exc:
                raise IngestError("parse", f"malformed use case: {exc}", line_no) from None
            out.append(use_case)
    return out


def _kmeans(vectors: np.ndarray, clusters: int, seed: int) -> np.ndarray:
    """Seeded k-means with k-means++ init; stops when assignments are stable."""
    rng = np.random.default_rng(seed)
    n = vectors.shape[0]
    centroids = np.empty((clusters, vectors.shape[1]), dtype=np.float64)
    centroids[0] = vectors[rng.integers(n)]
    for c in range(1, clusters):
        d2 = np.min(
            ((vectors[:, None, :] - centroids[None, :c, :]) ** 2).sum(axis=2), axis=1
        )
        total = d2.sum()
        if total <= 0.0:
            pick = rng.integers(n)
        else:
            pick = rng.choice(n, p=d2 / total)
        centroids[c] = vectors[pick]
    assignment = np.full(n, -1, dtype=np.int64)
    for _ in range(50):
        dists = ((vectors[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assignment = np.argmin(dists, axis=1)
        if np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        for c in range(clusters):
            members = vectors[assignment == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
    return assignment


def select_seed_examples(
    vectors,
    clusters: int,
    near_per_cluster: int,
    far_per_cluster: int,
    seed: int,
) -> list[int]:
    """Pick representative and outlier items from embedding space.

    Clusters the vectors (seeded k-means, Euclidean) and returns, per
    cluster, the ``near_per_cluster`` members closest to the centroid and
    the ``far_per_cluster`` farthest from it. The result is de-duplicated,
    sorted, and bit-stable for a fixed seed.
    """
    if clusters < 1:
        raise ArgumentError("clusters must be >= 1")
    if near_per_cluster < 0 or far_per_cluster < 0:
        raise ArgumentError("per-cluster counts must be >= 0")
    try:
        matrix = np.asarray(vectors, dtype=np.float64)
    except ValueError:
        raise DimensionError("vectors must all share one dimension") from None
    if matrix.ndim != 2:
        raise DimensionError("vectors must all share one dimension")
    if matrix.shape[1] == 0:
        raise DimensionError("zero-dimension vectors")
    n = matrix.shape[0]
    if clusters * (near_per_cluster + far_per_cluster) > n:
        raise CapacityError(
            f"requested {clusters * (near_per_cluster + far_per_cluster)} items "
            f"from a population of {n}"
        )
    if clusters > n:
        raise CapacityError(f"requested {clusters} clusters from {n} vectors")
    assignment = _kmeans(matrix, clusters, seed)
    selected: set[int] = set()
    for c in range(clusters):
        members = np.flatnonzero(assignment == c)
        if members.size == 0:
            continue
        centroid = matrix[members].mean(axis=0)
        dists = ((matrix[members] - centroid) ** 2).sum(axis=1)
        by_near = members[np.lexsort((members, dists))]
        selected.update(int(i) for i in by_near[:near_per_cluster])
        by_far = members[np.lexsort((members, -dists))]
        selected.update(int(i) for i in by_far[:far_per_cluster])
    return sorted(selected)
