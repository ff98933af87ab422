"""Result lists: hits, top-k selection, anchor merging, random baseline."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence, TYPE_CHECKING

import numpy as np

from ..errors import ArgumentError, CapacityError

if TYPE_CHECKING:
    from ..corpus import Corpus


@dataclass(frozen=True)
class RetrievalHit:
    """One retrieved item: similarity score, anchor provenance, 1-based rank."""

    item_id: str
    score: float
    anchor_index: int
    rank: int


def topk_positions(scores: np.ndarray, tie_ranks: np.ndarray, k: int) -> np.ndarray:
    """Positions of the k best scores; ties broken by ascending tie rank."""
    order = np.lexsort((tie_ranks, -scores))
    return order[:k]


def check_hit_ordering(hits: Sequence[RetrievalHit]) -> None:
    """Assert the rank/score invariant; used by tests and the service."""
    for i, hit in enumerate(hits):
        if hit.rank != i + 1:
            raise ArgumentError(f"rank {hit.rank} at position {i}")
        if i and hits[i - 1].score < hit.score:
            raise ArgumentError("scores must be non-increasing")


def merge_anchor_hits(
    per_anchor: Sequence[Sequence[RetrievalHit]], k: int
) -> list[RetrievalHit]:
    """Union the per-anchor lists, de-duplicated by item keeping the best score.

    On a score tie across anchors the lowest anchor_index wins, which keeps
    the result invariant under permutation of the input lists. Sorted by
    score descending (item_id ascending on ties) and truncated to ``k``.
    """
    if k < 1:
        raise ArgumentError("k must be >= 1")
    best: dict[str, RetrievalHit] = {}
    for hits in per_anchor:
        for hit in hits:
            cur = best.get(hit.item_id)
            if (
                cur is None
                or hit.score > cur.score
                or (hit.score == cur.score and hit.anchor_index < cur.anchor_index)
            ):
                best[hit.item_id] = hit
    merged = sorted(best.values(), key=lambda h: (-h.score, h.item_id))[:k]
    return [replace(hit, rank=i + 1) for i, hit in enumerate(merged)]


def random_baseline(corpus: "Corpus", k: int, seed: int) -> list[RetrievalHit]:
    """Seeded uniform sample without replacement; all scores zero."""
    if k < 1:
        raise ArgumentError("k must be >= 1")
    if k > len(corpus):
        raise CapacityError(f"k={k} exceeds corpus size {len(corpus)}")
    rng = np.random.default_rng(seed)
    positions = rng.choice(len(corpus), size=k, replace=False)
    items = corpus.items
    return [
        RetrievalHit(item_id=items[int(pos)].item_id, score=0.0, anchor_index=0, rank=i + 1)
        for i, pos in enumerate(positions)
    ]
