# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled cosine-similarity kernels.

Every pairwise similarity accumulates float32 products in float64 over
eight interleaved partial sums combined in a fixed tree; the order depends
only on the feature count, never on batch shape or thread count, so the
scalar and batch entry points agree bit for bit for identical inputs.
(The interleaving exists to break the add-latency chain; a single
sequential accumulator runs several times slower.) Parallelism is over
output rows only; per-row results do not depend on the thread count.
"""

import numpy as np

from cython.parallel cimport prange
from libc.math cimport NAN


cdef inline double _pair_sim(const float[:, ::1] a, Py_ssize_t i,
                             const float[:, ::1] b, Py_ssize_t j) noexcept nogil:
    cdef const float *pa = &a[i, 0]
    cdef const float *pb = &b[j, 0]
    cdef Py_ssize_t d = a.shape[1]
    cdef Py_ssize_t main = d - (d & 7)
    cdef Py_ssize_t k = 0
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    cdef double s4 = 0.0, s5 = 0.0, s6 = 0.0, s7 = 0.0
    cdef double acc
    while k < main:
        s0 += (<double> pa[k]) * (<double> pb[k])
        s1 += (<double> pa[k + 1]) * (<double> pb[k + 1])
        s2 += (<double> pa[k + 2]) * (<double> pb[k + 2])
        s3 += (<double> pa[k + 3]) * (<double> pb[k + 3])
        s4 += (<double> pa[k + 4]) * (<double> pb[k + 4])
        s5 += (<double> pa[k + 5]) * (<double> pb[k + 5])
        s6 += (<double> pa[k + 6]) * (<double> pb[k + 6])
        s7 += (<double> pa[k + 7]) * (<double> pb[k + 7])
        k += 8
    while k < d:
        s0 += (<double> pa[k]) * (<double> pb[k])
        k += 1
    acc = ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7))
    if acc > 1.0:
        acc = 1.0
    elif acc < -1.0:
        acc = -1.0
    return acc


def cosine_pair(const float[:, ::1] a, Py_ssize_t i, const float[:, ::1] b, Py_ssize_t j):
    """Clamped float64 dot product of row i of `a` with row j of `b`."""
    return _pair_sim(a, i, b, j)


def max_similarity(const float[:, ::1] emb, const long long[::1] idx,
                   bint exclude_self, int threads):
    """Best similarity of every row of `emb` to the rows indexed by `idx`.

    With exclude_self, comparisons where idx[j] equals the query row are
    skipped; a row left with no comparators yields NaN.
    """
    cdef Py_ssize_t n = emb.shape[0]
    cdef Py_ssize_t m = idx.shape[0]
    # gather the sampled rows once so the hot loop scans contiguously
    sampled_arr = np.ascontiguousarray(np.asarray(emb)[np.asarray(idx)])
    cdef const float[:, ::1] sampled = sampled_arr
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double best, s
    for i in prange(n, nogil=True, num_threads=threads, schedule="static"):
        best = -2.0
        for j in range(m):
            if exclude_self and idx[j] == i:
                continue
            s = _pair_sim(emb, i, sampled, j)
            if s > best:
                best = s
        ov[i] = best if best >= -1.0 else NAN
    return out


def similarity_matrix(const float[:, ::1] a, const float[:, ::1] b, int threads):
    """Full pairwise similarity matrix, shape (a rows, b rows), float64."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j
    for i in prange(n, nogil=True, num_threads=threads, schedule="static"):
        for j in range(m):
            ov[i, j] = _pair_sim(a, i, b, j)
    return out
