"""Numpy fallback for the search kernels.

Mirrors the compiled extension exactly: scores are accumulated in float64 so
both backends rank identically.
"""

from __future__ import annotations

import numpy as np


def dense_scores(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Inner products of every index row with the query, in float64."""
    if matrix.shape[0] == 0:
        return np.zeros(0, dtype=np.float64)
    return matrix.astype(np.float64) @ query.astype(np.float64)


def bm25_scores(
    doc_lens: np.ndarray,
    avgdl: float,
    k1: float,
    b: float,
    idf: np.ndarray,
    post_doc: np.ndarray,
    post_tf: np.ndarray,
    starts: np.ndarray,
    ends: np.ndarray,
) -> np.ndarray:
    """Accumulate per-document scores for the selected query terms.

    ``idf[t]`` belongs to the postings slice ``starts[t]:ends[t]`` of the
    flat ``post_doc`` / ``post_tf`` arrays.
    """
    scores = np.zeros(doc_lens.shape[0], dtype=np.float64)
    if avgdl <= 0.0 or idf.shape[0] == 0:
        return scores
    norm = k1 * (1.0 - b + b * doc_lens / avgdl)
    for t in range(idf.shape[0]):
        window = slice(int(starts[t]), int(ends[t]))
        docs = post_doc[window]
        tf = post_tf[window].astype(np.float64)
        scores[docs] += idf[t] * tf * (k1 + 1.0) / (tf + norm[docs])
    return scores
