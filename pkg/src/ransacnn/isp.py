"""Inlier score prediction: repeated uniform sub-sampling with worst-case
nearest-neighbor aggregation.

Each of the s iterations draws m embeddings uniformly without replacement,
scores every item by its best cosine similarity to the drawn set, and the
running inlier score keeps the minimum over iterations. Iteration k always
draws from RNG stream k of the caller's seed, so results are independent of
execution order and can be reproduced stream by stream.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import EmbeddingSet, InlierScores, SeededRng, sample_without_replacement

#: Default sample size as a fraction of the set size.
DEFAULT_SAMPLE_FRACTION = 0.05

#: Oracle implementations refuse sets larger than this.
ORACLE_MAX_N = 10_000


def default_sample_size(n: int, fraction: float = DEFAULT_SAMPLE_FRACTION) -> int:
    return max(1, math.ceil(fraction * n))


@dataclass(frozen=True)
class IspConfig:
    """Sampling configuration.

    Either sample_size or sample_fraction may be given, not both; when
    neither is, the sample size defaults to 5% of the set. iterations left
    unset with auto_iterations resolves to ceil(n / m), the point at which
    each item is expected to be drawn once.
    """

    sample_size: int | None = None
    iterations: int | None = None
    sample_fraction: float | None = None
    auto_iterations: bool = True
    exclude_self: bool = False

    def resolve(self, n: int) -> tuple[int, int]:
        """Return concrete (m, s) for a set of size n."""
        if n < 1:
            raise ValueError("set size must be at least 1")
        if self.sample_size is not None and self.sample_fraction is not None:
            raise ValueError("give sample_size or sample_fraction, not both")
        if self.sample_size is not None:
            m = int(self.sample_size)
        else:
            fraction = DEFAULT_SAMPLE_FRACTION if self.sample_fraction is None else self.sample_fraction
            if not 0.0 < fraction <= 1.0:
                raise ValueError(f"sample_fraction must be in (0, 1], got {fraction}")
            m = default_sample_size(n, fraction)
        if not 1 <= m <= n:
            raise ValueError(f"sample size must satisfy 1 <= m <= n, got m={m}, n={n}")
        if self.iterations is not None:
            s = int(self.iterations)
        elif self.auto_iterations:
            s = math.ceil(n / m)
        else:
            raise ValueError("iterations unset and auto_iterations disabled")
        if s < 1:
            raise ValueError(f"iterations must be at least 1, got {s}")
        if m == n:
            warnings.warn(
                "sample size equals the set size; every inlier score will be 1",
                RuntimeWarning,
                stacklevel=3,
            )
        return m, s


def iteration_sample(rng: SeededRng, n: int, m: int, iteration: int) -> np.ndarray:
    """Indices drawn by the given iteration (stream = iteration index)."""
    return sample_without_replacement(rng.stream(iteration), n, m)


def run_isp(
    emb: EmbeddingSet,
    config: IspConfig | None = None,
    rng: SeededRng | None = None,
    threads: int = 0,
) -> InlierScores:
    """Predict inlier scores for a normalized embedding set."""
    config = config or IspConfig()
    rng = rng or SeededRng(0)
    if not emb.normalized:
        raise ValueError("embedding set must be normalized before scoring")
    m, s = config.resolve(emb.n)
    eta = np.ones(emb.n, dtype=np.float64)
    for k in range(s):
        idx = iteration_sample(rng, emb.n, m, k)
        alpha = kernels.max_similarity(emb.data, idx, config.exclude_self, threads)
        eta = np.fmin(eta, alpha)  # fmin skips NaN rows (no comparator)
    return InlierScores(eta)


def run_isp_oracle(
    emb: EmbeddingSet,
    config: IspConfig | None = None,
    rng: SeededRng | None = None,
) -> InlierScores:
    """Reference implementation with plain loops; bit-identical to run_isp.

    Intended for tests; refuses sets beyond ORACLE_MAX_N rows.
    """
    config = config or IspConfig()
    rng = rng or SeededRng(0)
    if emb.n > ORACLE_MAX_N:
        raise ValueError(f"oracle is limited to n <= {ORACLE_MAX_N}")
    if not emb.normalized:
        raise ValueError("embedding set must be normalized before scoring")
    m, s = config.resolve(emb.n)
    data = emb.data
    eta = [1.0] * emb.n
    for k in range(s):
        idx = iteration_sample(rng, emb.n, m, k).tolist()
        for i in range(emb.n):
            best = None
            for j in idx:
                if config.exclude_self and j == i:
                    continue
                sim = kernels.cosine_pair(data, i, data, j)
                if best is None or sim > best:
                    best = sim
            if best is not None and best < eta[i]:
                eta[i] = best
    return InlierScores(np.array(eta, dtype=np.float64))
