"""Threshold sampling: refine inlier scores into outlier scores.

A rising threshold tau = (k-1)/t sweeps over t steps. Each step samples
only items whose inlier score exceeds tau, scores everything against the
sample, and folds the failure indicator 1[alpha < tau] into a running mean.
The sweep stops early once no item clears the threshold. Step k draws from
RNG stream TS_STREAM_OFFSET + k, which cannot collide with the inlier
stage's streams.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import EmbeddingSet, InlierScores, OutlierScores, SeededRng, sample_without_replacement
from .isp import default_sample_size

#: Stream ids at or above this offset belong to the threshold sweep.
TS_STREAM_OFFSET = 1 << 32


@dataclass(frozen=True)
class TsConfig:
    """Threshold sweep configuration; sample size defaults like the ISP stage."""

    threshold_iterations: int = 500
    sample_size: int | None = None

    def resolve(self, n: int) -> tuple[int, int]:
        """Return concrete (t, m) for a set of size n."""
        t = int(self.threshold_iterations)
        if t < 1:
            raise ValueError(f"threshold_iterations must be at least 1, got {t}")
        m = default_sample_size(n) if self.sample_size is None else int(self.sample_size)
        if m < 1:
            raise ValueError(f"sample size must be at least 1, got {m}")
        return t, m


def run_ts(
    emb: EmbeddingSet,
    eta: InlierScores,
    config: TsConfig | None = None,
    rng: SeededRng | None = None,
    threads: int = 0,
) -> OutlierScores:
    """Compute outlier scores from an embedding set and its inlier scores."""
    config = config or TsConfig()
    rng = rng or SeededRng(0)
    if not emb.normalized:
        raise ValueError("embedding set must be normalized before scoring")
    if len(eta) != emb.n:
        raise ValueError(f"inlier scores have length {len(eta)}, set has {emb.n} rows")
    t, m = config.resolve(emb.n)
    eta_v = eta.values
    sigma = np.zeros(emb.n, dtype=np.float64)
    completed = 0
    for k in range(1, t + 1):
        tau = (k - 1) / t
        omega = np.flatnonzero(eta_v > tau)
        if omega.size == 0:
            break
        take = min(omega.size, m)
        pos = sample_without_replacement(rng.stream(TS_STREAM_OFFSET + k), omega.size, take)
        alpha = kernels.max_similarity(emb.data, omega[pos], False, threads)
        fails = (alpha < tau).astype(np.float64)
        sigma = (fails + (k - 1) * sigma) / k
        completed = k
    if completed == 0:
        warnings.warn(
            "threshold sweep never ran: no inlier score exceeds 0, all outlier scores are 0",
            RuntimeWarning,
            stacklevel=2,
        )
    return OutlierScores(sigma, completed_iterations=completed)


def run_ts_oracle(
    emb: EmbeddingSet,
    eta: InlierScores,
    config: TsConfig | None = None,
    rng: SeededRng | None = None,
) -> OutlierScores:
    """Reference implementation with plain loops; bit-identical to run_ts."""
    config = config or TsConfig()
    rng = rng or SeededRng(0)
    if emb.n > 10_000:
        raise ValueError("oracle is limited to n <= 10000")
    if not emb.normalized:
        raise ValueError("embedding set must be normalized before scoring")
    if len(eta) != emb.n:
        raise ValueError(f"inlier scores have length {len(eta)}, set has {emb.n} rows")
    t, m = config.resolve(emb.n)
    data = emb.data
    eta_l = eta.values.tolist()
    sigma = [0.0] * emb.n
    completed = 0
    for k in range(1, t + 1):
        tau = (k - 1) / t
        omega = [j for j in range(emb.n) if eta_l[j] > tau]
        if not omega:
            break
        take = min(len(omega), m)
        pos = sample_without_replacement(rng.stream(TS_STREAM_OFFSET + k), len(omega), take)
        idx = [omega[p] for p in pos.tolist()]
        for i in range(emb.n):
            best = None
            for j in idx:
                sim = kernels.cosine_pair(data, i, data, j)
                if best is None or sim > best:
                    best = sim
            fail = 1.0 if best < tau else 0.0
            sigma[i] = (fail + (k - 1) * sigma[i]) / k
        completed = k
    if completed == 0:
        warnings.warn(
            "threshold sweep never ran: no inlier score exceeds 0, all outlier scores are 0",
            RuntimeWarning,
            stacklevel=2,
        )
    return OutlierScores(np.array(sigma, dtype=np.float64), completed_iterations=completed)


def inverted_isp_scores(eta: InlierScores) -> OutlierScores:
    """Outlier scores from inverted inlier scores, the sweep-free shortcut.

    Certified non-negative scores map to 1 - eta; otherwise (1 - eta) / 2
    rescales the [-1, 1] range into [0, 1]. Either way the ranking is the
    exact reverse of the inlier-score ranking.
    """
    v = eta.values
    if v.size and float(v.min()) >= 0.0:
        out = 1.0 - v
    else:
        out = (1.0 - v) / 2.0
    return OutlierScores(np.clip(out, 0.0, 1.0), completed_iterations=0)
