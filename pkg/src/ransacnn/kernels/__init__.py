"""Similarity kernel backends.

A compiled extension provides the hot inner loops; a pure-numpy fallback is
selected at import time when the extension is unavailable (or when
RANSACNN_FORCE_FALLBACK=1). Both backends guarantee that their scalar and
batch entry points produce bit-identical per-pair similarities; results may
differ between backends in the last few ulps because the float64
accumulation order differs.

Thread resolution order: explicit argument, then the RANSACNN_THREADS
environment variable, then the CPU count. The fallback backend ignores the
resolved value.
"""

from __future__ import annotations

import importlib
import os

import numpy as np

from . import fallback as _fallback

_native = None
if os.environ.get("RANSACNN_FORCE_FALLBACK") != "1":
    try:
        _native = importlib.import_module("._native", __package__)
    except ImportError:
        _native = None

_impl = _native if _native is not None else _fallback


def backend_name() -> str:
    return "compiled" if _native is not None else "numpy"


def resolve_threads(threads: int = 0) -> int:
    if threads and threads > 0:
        return int(threads)
    env = os.environ.get("RANSACNN_THREADS", "")
    if env.strip():
        try:
            parsed = int(env)
        except ValueError:
            parsed = 0
        if parsed > 0:
            return parsed
    return os.cpu_count() or 1


def _rows(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.float32)
    if out.ndim != 2:
        raise ValueError(f"expected a 2-d row matrix, got shape {a.shape}")
    return out


def cosine_pair(a: np.ndarray, i: int, b: np.ndarray, j: int) -> float:
    """Clamped similarity of row i of `a` with row j of `b` (float32 rows)."""
    return float(_impl.cosine_pair(_rows(a), i, _rows(b), j))


def max_similarity(
    emb: np.ndarray,
    idx: np.ndarray,
    exclude_self: bool = False,
    threads: int = 0,
) -> np.ndarray:
    """Best similarity of each row of `emb` to the rows indexed by `idx`.

    Rows with no comparators (exclude_self removed everything) come back
    as NaN so callers can skip them.
    """
    idx64 = np.ascontiguousarray(idx, dtype=np.int64)
    return _impl.max_similarity(_rows(emb), idx64, bool(exclude_self), resolve_threads(threads))


def similarity_matrix(a: np.ndarray, b: np.ndarray, threads: int = 0) -> np.ndarray:
    """Full pairwise similarity matrix between two row sets, float64."""
    return _impl.similarity_matrix(_rows(a), _rows(b), resolve_threads(threads))
