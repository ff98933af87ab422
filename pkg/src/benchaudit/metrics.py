"""Retrieval-quality metrics.

All functions are pure and operate on rank-ordered inputs. Precision
denominators stay at k even when fewer than k items were judged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import ArgumentError
from .judge import RelevanceLabel
from .retrieval.results import RetrievalHit

DEFAULT_GRADES: dict[RelevanceLabel, int] = {
    RelevanceLabel.RELEVANT: 2,
    RelevanceLabel.PARTIALLY_RELEVANT: 1,
    RelevanceLabel.IRRELEVANT: 0,
}


@dataclass
class MetricReport:
    """Metric values for one (use case, strategy, k) cell."""

    use_case_id: str
    k: int
    strategy: str = ""
    method_precision: float | None = None
    system_precision: float | None = None
    recall: float | None = None
    ndcg: float | None = None
    intersection: float | None = None
    denominators: dict[str, int] = field(default_factory=dict)


def method_precision_at_k(selections: Sequence[int], k: int) -> float:
    """Share of the top k whose selection score is 1 or 0 (denominator k)."""
    if k < 1:
        raise ArgumentError("k must be >= 1")
    positives = sum(1 for s in selections[:k] if s in (1, 0))
    return positives / k


def system_precision_at_k(labels: Sequence[RelevanceLabel], k: int) -> float:
    """Share of the top k labeled relevant or partially relevant."""
    if k < 1:
        raise ArgumentError("k must be >= 1")
    positive = (RelevanceLabel.RELEVANT, RelevanceLabel.PARTIALLY_RELEVANT)
    hits = sum(1 for l in labels[:k] if RelevanceLabel(l) in positive)
    return hits / k


def recall_at_k(hits: Sequence[RetrievalHit], gold: set[str], k: int) -> float:
    """|top-k hits ∩ gold| / |gold|."""
    if not gold:
        raise ArgumentError("gold set must be non-empty")
    if k < 1:
        raise ArgumentError("k must be >= 1")
    retrieved = {h.item_id for h in hits[:k]}
    return len(retrieved & gold) / len(gold)


def ndcg_at_k(
    labels: Sequence[RelevanceLabel],
    k: int,
    grades: Mapping[RelevanceLabel, int] | None = None,
) -> float:
    """Normalized DCG with exponential gain (2^grade - 1) and log2(i+1) discount.

    The ideal ordering sorts the same label multiset by grade, non-increasing.
    An all-zero ideal (IDCG = 0) yields 0 by convention.
    """
    if k < 1:
        raise ArgumentError("k must be >= 1")
    if not labels:
        raise ArgumentError("label list must be non-empty")
    grade_map = DEFAULT_GRADES if grades is None else grades
    gains = [float(2 ** grade_map[RelevanceLabel(l)] - 1) for l in labels]

    def dcg(values: Sequence[float]) -> float:
        return sum(v / math.log2(i + 2) for i, v in enumerate(values[:k]))

    ideal = dcg(sorted(gains, reverse=True))
    if ideal == 0.0:
        return 0.0
    return dcg(gains) / ideal


def intersection_at_k(
    method_hits: Sequence[RetrievalHit], union_relevant: set[str], k: int
) -> float:
    """|top-k ∩ union of items judged relevant by any method| / k."""
    if k < 1:
        raise ArgumentError("k must be >= 1")
    retrieved = {h.item_id for h in method_hits[:k]}
    return len(retrieved & union_relevant) / k


def support_fraction(
    list_lengths: Sequence[int],
    gold_nonempty: Sequence[bool],
    k: int,
    total_queries: int,
) -> float:
    """Fraction of queries with non-empty gold and a result list of depth >= k."""
    if total_queries < 1:
        raise ArgumentError("total_queries must be >= 1")
    if len(list_lengths) != len(gold_nonempty):
        raise ArgumentError("list_lengths and gold_nonempty must align")
    supported = sum(
        1 for length, has_gold in zip(list_lengths, gold_nonempty) if has_gold and length >= k
    )
    return supported / total_queries


def common_cutoff(
    list_lengths: Sequence[int],
    gold_nonempty: Sequence[bool],
    threshold: float,
    total_queries: int,
) -> int:
    """Largest k whose support fraction stays at or above ``threshold``; 0 if none."""
    if not (0.0 < threshold <= 1.0):
        raise ArgumentError("threshold must lie in (0, 1]")
    if total_queries < 1:
        raise ArgumentError("total_queries must be >= 1")
    best = 0
    for k in range(1, max(list_lengths, default=0) + 1):
        if support_fraction(list_lengths, gold_nonempty, k, total_queries) >= threshold:
            best = k
    return best
