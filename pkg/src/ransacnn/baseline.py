"""k-nearest-neighbor distance scoring, the training-based comparator.

Scores each test embedding by its cosine distance (1 - similarity) to the
k-th nearest row of a reference set, then min-max rescales per test set.
Rescaling does not change the ranking, so rank-based evaluation is
unaffected; it only makes thresholds readable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import EmbeddingSet, OutlierScores

# Block of test rows per distance computation.
_BLOCK = 2048


@dataclass(frozen=True)
class KnnConfig:
    k: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")


def knn_score(
    train: EmbeddingSet,
    test: EmbeddingSet,
    config: KnnConfig | None = None,
    threads: int = 0,
) -> OutlierScores:
    """Distance to the k-th nearest training embedding, rescaled to [0, 1]."""
    config = config or KnnConfig()
    if train.d != test.d:
        raise ValueError(f"dimension mismatch: train d={train.d}, test d={test.d}")
    if config.k >= train.n:
        raise ValueError(f"k={config.k} must be below the training set size {train.n}")
    raw = kth_neighbor_distance(train, test, config.k, threads)
    lo = float(raw.min())
    hi = float(raw.max())
    if hi > lo:
        raw = (raw - lo) / (hi - lo)
    else:
        raw = np.zeros_like(raw)
    return OutlierScores(np.clip(raw, 0.0, 1.0))


def kth_neighbor_distance(
    train: EmbeddingSet,
    test: EmbeddingSet,
    k: int,
    threads: int = 0,
) -> np.ndarray:
    """Raw cosine distance of every test row to its k-th nearest train row."""
    out = np.empty(test.n, dtype=np.float64)
    for start in range(0, test.n, _BLOCK):
        stop = min(start + _BLOCK, test.n)
        dists = 1.0 - kernels.similarity_matrix(test.data[start:stop], train.data, threads)
        out[start:stop] = np.partition(dists, k - 1, axis=1)[:, k - 1]
    return out
