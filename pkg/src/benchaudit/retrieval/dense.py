"""Exact dense retrieval over L2-normalized embeddings.

Search is a full scan (no approximation): inner product of normalized
vectors equals cosine similarity, ties break on ascending item_id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from ..errors import ArgumentError, DimensionError, StateError
from . import kernels
from .results import RetrievalHit, topk_positions

if TYPE_CHECKING:
    from ..corpus import Corpus
    from ..gateways import EmbeddingGateway


@dataclass
class DenseIndex:
    item_ids: list[str]
    vectors: np.ndarray  # (n, dimension) float32, rows L2-normalized
    space: str = "raw"
    _id_rank: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        self.vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2:
            raise DimensionError("vectors must be a 2-d array")
        if len(self.item_ids) != self.vectors.shape[0]:
            raise ArgumentError("one vector per item required")
        if self.vectors.shape[0]:
            norms = np.linalg.norm(self.vectors.astype(np.float64), axis=1)
            if np.any(np.abs(norms - 1.0) > 1e-6):
                raise ArgumentError("index vectors must be L2-normalized")
        n = len(self.item_ids)
        order = sorted(range(n), key=lambda i: self.item_ids[i])
        self._id_rank = np.empty(n, dtype=np.int64)
        for rank, pos in enumerate(order):
            self._id_rank[pos] = rank

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.item_ids)


def build_dense_index(
    corpus: "Corpus",
    embed: "EmbeddingGateway",
    space: str = "raw",
    batch_size: int = 128,
) -> DenseIndex:
    """Embed every item (text or shorthand per ``space``) into an index."""
    if space not in ("raw", "shorthand"):
        raise ArgumentError(f"unknown space {space!r}")
    texts: list[str] = []
    item_ids: list[str] = []
    for item in corpus:
        if space == "shorthand":
            if item.shorthand is None:
                raise StateError(f"item {item.item_id!r} has no shorthand annotation")
            texts.append(item.shorthand)
        else:
            texts.append(item.text)
        item_ids.append(item.item_id)
    if not texts:
        return DenseIndex(
            item_ids=[], vectors=np.zeros((0, embed.config.embed_dim), dtype=np.float32), space=space
        )
    batches = [texts[i : i + batch_size] for i in range(0, len(texts), batch_size)]
    from ..gateways import run_parallel

    embedded = run_parallel(embed.embed, batches, embed.config.max_parallel)
    return DenseIndex(item_ids=item_ids, vectors=np.vstack(embedded), space=space)


def search_dense(
    index: DenseIndex,
    query_vector: np.ndarray,
    k: int,
    anchor_index: int = 0,
) -> list[RetrievalHit]:
    """Exact top-k by inner product (cosine on normalized vectors)."""
    if k < 1:
        raise ArgumentError("k must be >= 1")
    query = np.ascontiguousarray(query_vector, dtype=np.float32).ravel()
    if query.shape[0] != index.dimension:
        raise DimensionError(
            f"query dimension {query.shape[0]} != index dimension {index.dimension}"
        )
    if len(index) == 0:
        return []
    scores = kernels.dense_scores(index.vectors, query)
    top = topk_positions(scores, index._id_rank, k)
    return [
        RetrievalHit(
            item_id=index.item_ids[int(pos)],
            score=float(scores[pos]),
            anchor_index=anchor_index,
            rank=i + 1,
        )
        for i, pos in enumerate(top)
    ]
