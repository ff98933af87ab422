"""Independent reference implementations used only to check the real ones.

Everything here is deliberately naive (scalar loops, exhaustive enumeration)
and shares no code with the package under test.
"""

from __future__ import annotations

import itertools
import math
import re
from collections import Counter


def bm25_reference(docs: list[str], query: str, k1: float, b: float) -> list[float]:
    """Scalar evaluation of the BM25 formula over every (term, doc) pair."""
    token_lists = [re.findall(r"\w+", d.lower()) for d in docs]
    n = len(docs)
    lengths = [len(t) for t in token_lists]
    avgdl = sum(lengths) / n
    counts = [Counter(t) for t in token_lists]
    scores = []
    query_terms = sorted(set(re.findall(r"\w+", query.lower())))
    for d in range(n):
        total = 0.0
        for term in query_terms:
            tf = counts[d].get(term, 0)
            if tf == 0:
                continue
            df = sum(1 for c in counts if term in c)
            idf = math.log((n - df + 0.5) / (df + 0.5) + 1.0)
            total += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * lengths[d] / avgdl))
        scores.append(total)
    return scores


def dense_topk_reference(matrix, query, ids: list[str], k: int) -> list[str]:
    """Full linear scan: float64 dots, sort by (-score, id), take k."""
    scored = []
    for row, item_id in zip(matrix, ids):
        dot = 0.0
        for a, c in zip(row, query):
            dot += float(a) * float(c)
        scored.append((-dot, item_id))
    scored.sort()
    return [item_id for _, item_id in scored[:k]]


def merge_reference(per_anchor, k: int):
    """Flatten, dedup by max score (min anchor on ties), sort, truncate."""
    best = {}
    for hits in per_anchor:
        for hit in hits:
            key = hit.item_id
            if key not in best or (-hit.score, hit.anchor_index) < (
                -best[key].score,
                best[key].anchor_index,
            ):
                best[key] = hit
    ordered = sorted(best.values(), key=lambda h: (-h.score, h.item_id))
    return [(h.item_id, h.score) for h in ordered[:k]]


def ndcg_reference(grades: list[int], k: int) -> float:
    """Brute-force normalized DCG: max DCG over every permutation."""

    def dcg(values):
        return sum((2**g - 1) / math.log2(i + 2) for i, g in enumerate(values[:k]))

    best = max(dcg(p) for p in itertools.permutations(grades))
    if best == 0.0:
        return 0.0
    return dcg(grades) / best


def kendall_reference(x, y) -> float:
    """O(n^2) pair enumeration of tau-b."""
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    n = len(x)
    concordant = discordant = tied_x = tied_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = (x[i] > x[j]) - (x[i] < x[j])
            dy = (y[i] > y[j]) - (y[i] < y[j])
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                tied_x += 1
            elif dy == 0:
                tied_y += 1
            elif dx == dy:
                concordant += 1
            else:
                discordant += 1
    denom = math.sqrt(
        (concordant + discordant + tied_x) * (concordant + discordant + tied_y)
    )
    if denom == 0.0:
        raise ZeroDivisionError("degenerate margins")
    return (concordant - discordant) / denom


def support_fraction_reference(lengths, gold_flags, k: int, total: int) -> float:
    return sum(1 for l, g in zip(lengths, gold_flags) if g and l >= k) / total
