#!/usr/bin/env python3
"""Benchmark the compiled search kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--items 70000] [--dim 256] [--repeats 7]

Reports per-query latency for exact dense top-k and BM25 scoring on a
synthetic corpus sized like the production database.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from benchaudit.retrieval import _kernels_py

try:
    from benchaudit.retrieval import _kernels as _compiled
except ImportError:
    _compiled = None

from benchaudit.retrieval.results import topk_positions


def best_of(fn, repeats: int) -> float:
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return min(samples)


def bench_dense(backend, matrix, queries, k, repeats):
    tie = np.arange(matrix.shape[0], dtype=np.int64)

    def run():
        for q in queries:
            scores = backend.dense_scores(matrix, q)
            topk_positions(scores, tie, k)

    return best_of(run, repeats) / len(queries)


def make_postings(rng, n_docs, vocab, avg_df):
    doc_lens = rng.integers(8, 60, size=n_docs).astype(np.float64)
    idf = rng.uniform(0.2, 3.0, size=vocab)
    doc_chunks, tf_chunks, starts, ends = [], [], [], []
    cursor = 0
    for _ in range(vocab):
        df = max(1, int(rng.poisson(avg_df)))
        df = min(df, n_docs)
        docs = np.sort(rng.choice(n_docs, size=df, replace=False)).astype(np.int32)
        doc_chunks.append(docs)
        tf_chunks.append(rng.integers(1, 5, size=df).astype(np.float32))
        starts.append(cursor)
        cursor += df
        ends.append(cursor)
    return (
        doc_lens,
        float(doc_lens.mean()),
        idf,
        np.concatenate(doc_chunks),
        np.concatenate(tf_chunks),
        np.asarray(starts, dtype=np.int64),
        np.asarray(ends, dtype=np.int64),
    )


def bench_bm25(backend, packed, term_count, repeats, rng):
    doc_lens, avgdl, idf, post_doc, post_tf, starts, ends = packed
    sel = rng.choice(len(idf), size=term_count, replace=False).astype(np.int64)
    sel.sort()

    def run():
        scores = backend.bm25_scores(
            doc_lens, avgdl, 1.2, 0.75, idf[sel], post_doc, post_tf, starts[sel], ends[sel]
        )
        matched = np.flatnonzero(scores > 0)
        topk_positions(scores[matched], matched.astype(np.int64), 20)

    return best_of(run, repeats)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--items", type=int, default=70_000)
    parser.add_argument("--dim", type=int, default=256)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    rng = np.random.default_rng(1234)
    matrix = rng.normal(size=(args.items, args.dim)).astype(np.float32)
    matrix /= np.linalg.norm(matrix.astype(np.float64), axis=1, keepdims=True).astype(np.float32)
    queries = [
        (q / np.linalg.norm(q)).astype(np.float32)
        for q in rng.normal(size=(8, args.dim))
    ]
    packed = make_postings(rng, args.items, vocab=2000, avg_df=args.items // 200)

    backends = [("python", _kernels_py)]
    if _compiled is not None:
        backends.append(("compiled", _compiled))
    else:
        print("compiled extension not built; benchmarking the fallback only")

    print(f"dense top-20 over {args.items} x {args.dim} (per query) and BM25 (8 terms)")
    print(f"{'backend':<10} {'dense ms':>10} {'bm25 ms':>10}")
    results = {}
    for name, backend in backends:
        dense_s = bench_dense(backend, matrix, queries, 20, args.repeats)
        bm25_s = bench_bm25(backend, packed, 8, args.repeats, np.random.default_rng(5))
        results[name] = (dense_s, bm25_s)
        print(f"{name:<10} {dense_s * 1e3:>10.2f} {bm25_s * 1e3:>10.2f}")
    if len(results) == 2:
        py, cy = results["python"], results["compiled"]
        print(f"{'speedup':<10} {py[0] / cy[0]:>9.2f}x {py[1] / cy[1]:>9.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
