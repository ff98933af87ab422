"""Lexical and dense retrieval over the benchmark corpus."""

from .dense import DenseIndex, build_dense_index, search_dense
from .kernels import BACKEND, COMPILED
from .lexical import LexicalIndex, build_lexical_index, search_lexical
from .results import (
    RetrievalHit,
    check_hit_ordering,
    merge_anchor_hits,
    random_baseline,
)
from .storage import (
    load_dense_index,
    load_lexical_index,
    save_dense_index,
    save_lexical_index,
)

__all__ = [
    "BACKEND",
    "COMPILED",
    "DenseIndex",
    "LexicalIndex",
    "RetrievalHit",
    "build_dense_index",
    "build_lexical_index",
    "check_hit_ordering",
    "load_dense_index",
    "load_lexical_index",
    "merge_anchor_hits",
    "random_baseline",
    "save_dense_index",
    "save_lexical_index",
    "search_dense",
    "search_lexical",
]
