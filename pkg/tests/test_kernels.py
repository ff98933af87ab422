"""Parity between the compiled kernels and the numpy fallback."""

from __future__ import annotations

import numpy as np
import pytest

from benchaudit.retrieval import _kernels_py
from benchaudit.retrieval.kernels import COMPILED
from benchaudit.retrieval.results import topk_positions

compiled = pytest.importorskip("benchaudit.retrieval._kernels")


def test_extension_built():
    assert COMPILED, "compiled kernel extension should be importable in this build"


def test_dense_scores_parity():
    rng = np.random.default_rng(42)
    matrix = rng.normal(size=(500, 64)).astype(np.float32)
    query = rng.normal(size=64).astype(np.float32)
    fast = compiled.dense_scores(matrix, query)
    slow = _kernels_py.dense_scores(matrix, query)
    assert np.allclose(fast, slow, atol=1e-9)
    tie = rng.permutation(500).astype(np.int64)
    assert np.array_equal(topk_positions(fast, tie, 25), topk_positions(slow, tie, 25))


def test_dense_scores_empty():
    matrix = np.zeros((0, 16), dtype=np.float32)
    query = np.zeros(16, dtype=np.float32)
    assert compiled.dense_scores(matrix, query).shape == (0,)
    assert _kernels_py.dense_scores(matrix, query).shape == (0,)


def _random_postings(seed: int, n_docs: int, n_terms: int):
    rng = np.random.default_rng(seed)
    doc_lens = rng.integers(1, 40, size=n_docs).astype(np.float64)
    avgdl = float(doc_lens.mean())
    idf = rng.uniform(0.1, 3.0, size=n_terms)
    doc_chunks, tf_chunks, starts, ends = [], [], [], []
    cursor = 0
    for _ in range(n_terms):
        df = int(rng.integers(1, n_docs + 1))
        docs = np.sort(rng.choice(n_docs, size=df, replace=False)).astype(np.int32)
        tfs = rng.integers(1, 6, size=df).astype(np.float32)
        doc_chunks.append(docs)
        tf_chunks.append(tfs)
        starts.append(cursor)
        cursor += df
        ends.append(cursor)
    return (
        doc_lens,
        avgdl,
        idf,
        np.concatenate(doc_chunks),
        np.concatenate(tf_chunks),
        np.asarray(starts, dtype=np.int64),
        np.asarray(ends, dtype=np.int64),
    )


def test_bm25_scores_parity():
    for seed in range(5):
        doc_lens, avgdl, idf, post_doc, post_tf, starts, ends = _random_postings(
            seed, n_docs=120, n_terms=9
        )
        fast = compiled.bm25_scores(doc_lens, avgdl, 1.2, 0.75, idf, post_doc, post_tf, starts, ends)
        slow = _kernels_py.bm25_scores(doc_lens, avgdl, 1.2, 0.75, idf, post_doc, post_tf, starts, ends)
        assert np.allclose(fast, slow, atol=1e-9)
