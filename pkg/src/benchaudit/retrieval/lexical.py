"""BM25 lexical index over corpus text (raw or shorthand space).

Scoring follows the standard Okapi form with a non-negative IDF:

    score(q, d) = sum over distinct query terms t of
        IDF(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))
    IDF(t) = ln((N - df + 0.5) / (df + 0.5) + 1)

Documents with zero score are never returned; ties break on ascending
item_id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from ..errors import ArgumentError, StateError
from ..text import tokenize
from . import kernels
from .results import RetrievalHit, topk_positions

if TYPE_CHECKING:
    from ..corpus import Corpus


@dataclass
class LexicalIndex:
    item_ids: list[str]
    postings: dict[str, list[tuple[int, int]]]  # term -> [(doc position, tf)]
    doc_lengths: np.ndarray
    k1: float
    b: float
    space: str = "raw"
    # packed arrays consumed by the kernels, derived from `postings`
    _terms: list[str] = field(default_factory=list, repr=False)
    _term_pos: dict[str, int] = field(default_factory=dict, repr=False)
    _idf: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    _post_doc: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    _post_tf: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    _offsets: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]
    _id_rank: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        n = len(self.item_ids)
        self.doc_lengths = np.asarray(self.doc_lengths, dtype=np.float64)
        self._terms = sorted(self.postings)
        self._term_pos = {t: i for i, t in enumerate(self._terms)}
        total = sum(len(self.postings[t]) for t in self._terms)
        self._idf = np.empty(len(self._terms), dtype=np.float64)
        self._post_doc = np.empty(total, dtype=np.int32)
        self._post_tf = np.empty(total, dtype=np.float32)
        self._offsets = np.zeros(len(self._terms) + 1, dtype=np.int64)
        cursor = 0
        for i, term in enumerate(self._terms):
            entries = self.postings[term]
            df = len(entries)
            self._idf[i] = np.log((n - df + 0.5) / (df + 0.5) + 1.0)
            for doc, tf in entries:
                self._post_doc[cursor] = doc
                self._post_tf[cursor] = tf
                cursor += 1
            self._offsets[i + 1] = cursor
        order = sorted(range(n), key=lambda i: self.item_ids[i])
        self._id_rank = np.empty(n, dtype=np.int64)
        for rank, pos in enumerate(order):
            self._id_rank[pos] = rank

    @property
    def avg_doc_length(self) -> float:
        return float(self.doc_lengths.mean()) if len(self.doc_lengths) else 0.0

    def __len__(self) -> int:
        return len(self.item_ids)


def _space_text(item, space: str) -> str:
    if space == "raw":
        return item.text
    if item.shorthand is None:
        raise StateError(f"item {item.item_id!r} has no shorthand annotation")
    return item.shorthand


def build_lexical_index(
    corpus: "Corpus", k1: float = 1.2, b: float = 0.75, space: str = "raw"
) -> LexicalIndex:
    """Tokenize the corpus and build the postings index."""
    if len(corpus) == 0:
        raise ArgumentError("cannot index an empty corpus")
    if k1 <= 0:
        raise ArgumentError("k1 must be > 0")
    if not (0.0 <= b <= 1.0):
        raise ArgumentError("b must lie in [0, 1]")
    if space not in ("raw", "shorthand"):
        raise ArgumentError(f"unknown space {space!r}")
    item_ids: list[str] = []
    doc_lengths: list[int] = []
    postings: dict[str, dict[int, int]] = {}
    for pos, item in enumerate(corpus):
        item_ids.append(item.item_id)
        tokens = tokenize(_space_text(item, space))
        doc_lengths.append(len(tokens))
        for token in tokens:
            per_doc = postings.setdefault(token, {})
            per_doc[pos] = per_doc.get(pos, 0) + 1
    return LexicalIndex(
        item_ids=item_ids,
        postings={t: sorted(d.items()) for t, d in postings.items()},
        doc_lengths=np.asarray(doc_lengths, dtype=np.float64),
        k1=k1,
        b=b,
        space=space,
    )


def search_lexical(
    index: LexicalIndex, query: str, k: int, anchor_index: int = 0
) -> list[RetrievalHit]:
    """Top-k documents by BM25 score; zero-score documents are excluded."""
    if k < 1:
        raise ArgumentError("k must be >= 1")
    terms = sorted({t for t in tokenize(query) if t in index._term_pos})
    if not terms:
        return []
    sel = np.asarray([index._term_pos[t] for t in terms], dtype=np.int64)
    scores = kernels.bm25_scores(
        index.doc_lengths,
        index.avg_doc_length,
        index.k1,
        index.b,
        index._idf[sel],
        index._post_doc,
        index._post_tf,
        index._offsets[sel],
        index._offsets[sel + 1],
    )
    matched = np.flatnonzero(scores > 0.0)
    if matched.size == 0:
        return []
    top = matched[topk_positions(scores[matched], index._id_rank[matched], k)]
    return [
        RetrievalHit(
            item_id=index.item_ids[int(pos)],
            score=float(scores[pos]),
            anchor_index=anchor_index,
            rank=i + 1,
        )
        for i, pos in enumerate(top)
    ]
