# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled search kernels: dense inner products and BM25 accumulation.

Semantics match ``_kernels_py`` (float64 accumulation over float32 inputs);
only the speed differs.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def dense_scores(const float[:, ::1] matrix, const float[::1] query):
    cdef Py_ssize_t n = matrix.shape[0]
    cdef Py_ssize_t d = matrix.shape[1]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(d):
            acc += (<double> matrix[i, j]) * (<double> query[j])
        ov[i] = acc
    return out


def bm25_scores(
    const double[::1] doc_lens,
    double avgdl,
    double k1,
    double b,
    const double[::1] idf,
    const cnp.int32_t[::1] post_doc,
    const float[::1] post_tf,
    const cnp.int64_t[::1] starts,
    const cnp.int64_t[::1] ends,
):
    cdef Py_ssize_t n = doc_lens.shape[0]
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t t, p
    cdef cnp.int32_t doc
    cdef double tf, weight
    if avgdl <= 0.0:
        return out
    for t in range(idf.shape[0]):
        weight = idf[t] * (k1 + 1.0)
        for p in range(starts[t], ends[t]):
            doc = post_doc[p]
            tf = <double> post_tf[p]
            ov[doc] += weight * tf / (tf + k1 * (1.0 - b + b * doc_lens[doc] / avgdl))
    return out
