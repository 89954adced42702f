"""Pure-numpy cosine-similarity kernels.

All dot products run through np.einsum on float64 copies of the float32
rows. einsum computes each (i, j) pair with the same reduction order
regardless of batch shape, so the scalar and batch entry points here agree
bit for bit (BLAS matmul does not have that property, which is why it is
not used). The `threads` arguments are accepted for interface parity with
the compiled backend and ignored.
"""

from __future__ import annotations

import numpy as np

# Rows per einsum block; bounds the (rows x m) temporary.
_BLOCK = 1 << 14


def _f64(rows: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(rows, dtype=np.float64)


def cosine_pair(a: np.ndarray, i: int, b: np.ndarray, j: int) -> float:
    s = float(np.einsum("k,k->", _f64(a[i]), _f64(b[j])))
    return min(1.0, max(-1.0, s))


def max_similarity(emb: np.ndarray, idx: np.ndarray, exclude_self: bool, threads: int) -> np.ndarray:
    n = emb.shape[0]
    sampled = _f64(emb[idx])
    out = np.empty(n, dtype=np.float64)
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        sims = np.einsum("ik,jk->ij", _f64(emb[start:stop]), sampled)
        np.clip(sims, -1.0, 1.0, out=sims)
        if exclude_self:
            rows = np.nonzero((idx >= start) & (idx < stop))[0]
            sims[idx[rows] - start, rows] = -np.inf
        block_max = sims.max(axis=1)
        out[start:stop] = np.where(np.isinf(block_max), np.nan, block_max)
    return out


def similarity_matrix(a: np.ndarray, b: np.ndarray, threads: int) -> np.ndarray:
    b64 = _f64(b)
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.float64)
    for start in range(0, a.shape[0], _BLOCK):
        stop = min(start + _BLOCK, a.shape[0])
        sims = np.einsum("ik,jk->ij", _f64(a[start:stop]), b64)
        np.clip(sims, -1.0, 1.0, out=sims)
        out[start:stop] = sims
    return out
