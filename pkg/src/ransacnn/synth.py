"""Labeled synthetic embedding sets with certified separation bounds.

The generator places inliers inside a spherical cap around a random unit
center mu, with the cap half-angle chosen so any two inliers have cosine
similarity strictly above g. Outliers are placed far enough from mu that
their cosine to every inlier stays strictly below h; their mutual
similarity is unconstrained (scattered mode) or deliberately high
(clustered modes, which exercise the all-outlier-sample failure mode).
Every construction is verified by an exhaustive pairwise scan whose
measured extremes are attached to the result as a certificate.

An optional noise level perturbs every point after placement, which may
violate the strict bounds on purpose; the certificate then simply reports
the measured values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import beta as beta_dist

from . import kernels
from .core import EmbeddingSet, SeededRng, sample_without_replacement
from .errors import GenerationInfeasibleError

#: Per-point resample budget before generation is declared infeasible.
RETRY_BUDGET = 100

#: Relative safety margin applied inside the requested bounds.
MARGIN = 0.05

#: Smallest angle (radians) at which two float32 unit vectors remain
#: reliably distinguishable; used by the cap capacity pre-check.
MIN_ANGLE = math.sqrt(2.0 * float(np.finfo(np.float32).eps))

#: Within-cluster cosine target for clustered outliers.
CLUSTER_COS = 0.95

_STREAM_CENTER = 0
_STREAM_INLIERS = 1
_STREAM_OUTLIERS = 2
_STREAM_NOISE = 3
_STREAM_PICK = 4
_STREAM_SHUFFLE = 5

# Certificate scans process this many rows per similarity block.
_SCAN_BLOCK = 512


@dataclass(frozen=True)
class SynthConfig:
    """Generator parameters.

    g is the inlier-pair cosine lower bound; h the inlier-outlier upper
    bound (h < g). outlier_clusters = 0 scatters outliers uniformly over
    the allowed region; q >= 1 groups them into q tight clusters.
    """

    n_inliers: int
    n_outliers: int
    d: int
    g: float
    h: float
    noise: float = 0.0
    outlier_clusters: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.n_inliers < 1:
            raise ValueError("n_inliers must be at least 1")
        if self.n_outliers < 0:
            raise ValueError("n_outliers must be non-negative")
        if self.d < 2:
            raise ValueError("d must be at least 2")
        if not -1.0 <= self.h < self.g <= 1.0:
            raise ValueError(f"need -1 <= h < g <= 1, got h={self.h}, g={self.g}")
        if self.noise < 0.0:
            raise ValueError("noise must be non-negative")
        if self.outlier_clusters < 0:
            raise ValueError("outlier_clusters must be non-negative")


@dataclass(frozen=True, eq=False)
class LabeledSet:
    """Embeddings plus ground truth (label 1 = outlier) and the measured
    separation certificate (min inlier-pair cosine, max cross cosine).

    Sentinels: g_achieved = 1.0 when there are no inlier pairs,
    h_achieved = -1.0 when either class is empty.
    """

    embeddings: EmbeddingSet
    labels: np.ndarray
    g_achieved: float
    h_achieved: float

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int8)
        if labels.shape != (self.embeddings.n,):
            raise ValueError("labels must have one entry per embedding row")
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be 0 (inlier) or 1 (outlier)")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.embeddings.n

    @property
    def n_inliers(self) -> int:
        return int(np.sum(self.labels == 0))

    @property
    def n_outliers(self) -> int:
        return int(np.sum(self.labels == 1))

    def inlier_rows(self) -> np.ndarray:
        return self.embeddings.data[self.labels == 0]

    def outlier_rows(self) -> np.ndarray:
        return self.embeddings.data[self.labels == 1]

    def take(self, indices: np.ndarray) -> "LabeledSet":
        """Row subset. The parent certificate is kept; it remains a valid
        (possibly loose) bound for any subset."""
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledSet(
            EmbeddingSet(self.embeddings.data[idx], normalized=self.embeddings.normalized),
            self.labels[idx],
            self.g_achieved,
            self.h_achieved,
        )


def _unit(v: np.ndarray) -> np.ndarray:
    return v / math.sqrt(float(np.einsum("k,k->", v, v)))


def _random_unit(gen: np.random.Generator, d: int) -> np.ndarray:
    while True:
        v = gen.standard_normal(d)
        n2 = float(np.einsum("k,k->", v, v))
        if n2 > 1e-24:
            return v / math.sqrt(n2)


def _unit_perp(gen: np.random.Generator, mu: np.ndarray) -> np.ndarray:
    for _ in range(RETRY_BUDGET):
        v = gen.standard_normal(mu.shape[0])
        v -= float(np.einsum("k,k->", v, mu)) * mu
        n2 = float(np.einsum("k,k->", v, v))
        if n2 > 1e-24:
            return v / math.sqrt(n2)
    raise GenerationInfeasibleError("could not draw a direction orthogonal to the cap center")


def _cos_below(gen: np.random.Generator, d: int, bound: float) -> float:
    """Draw cos(angle to mu) for a uniform sphere point conditioned on
    cos <= bound, via the Beta((d-1)/2, (d-1)/2) marginal inverse CDF."""
    a = (d - 1) / 2.0
    cap = float(beta_dist.cdf((bound + 1.0) / 2.0, a, a))
    if cap <= 0.0:
        raise GenerationInfeasibleError("outlier region has vanishing probability mass")
    x = float(beta_dist.ppf(gen.random() * cap, a, a))
    return max(-1.0, min(bound, 2.0 * x - 1.0))


def _cap_point(gen: np.random.Generator, center: np.ndarray, half_angle: float) -> np.ndarray:
    """Unit vector within half_angle of center: normalize(center + sin(theta) u)."""
    u = _random_unit(gen, center.shape[0])
    return _unit(center + math.sin(half_angle) * u)


def _check_feasible(cfg: SynthConfig, theta: float) -> None:
    if cfg.n_inliers < 2:
        return
    if theta <= MIN_ANGLE:
        raise GenerationInfeasibleError(
            f"inlier bound g={cfg.g} leaves no usable cap width in float32"
        )
    capacity_log = (cfg.d - 1) * math.log(theta / MIN_ANGLE)
    if capacity_log < math.log(cfg.n_inliers):
        raise GenerationInfeasibleError(
            f"cap packing bound: cannot place {cfg.n_inliers} inliers with pairwise "
            f"cosine > {cfg.g} in dimension {cfg.d}"
        )


def _pairwise_min(rows: np.ndarray) -> float:
    """Minimum off-diagonal similarity, exhaustive scan."""
    n = rows.shape[0]
    if n < 2:
        return 1.0
    best = 1.0
    for start in range(0, n, _SCAN_BLOCK):
        stop = min(start + _SCAN_BLOCK, n)
        sims = kernels.similarity_matrix(rows[start:stop], rows)
        sims[np.arange(start, stop) - start, np.arange(start, stop)] = 1.0
        best = min(best, float(sims.min()))
    return best


def _cross_max(a: np.ndarray, b: np.ndarray) -> float:
    """Maximum similarity between two row sets, exhaustive scan."""
    if a.shape[0] == 0 or b.shape[0] == 0:
        return -1.0
    best = -1.0
    for start in range(0, a.shape[0], _SCAN_BLOCK):
        stop = min(start + _SCAN_BLOCK, a.shape[0])
        best = max(best, float(kernels.similarity_matrix(a[start:stop], b).max()))
    return best


def generate(cfg: SynthConfig) -> LabeledSet:
    """Build a labeled set satisfying the separation bounds (noise = 0) or
    a softened variant of it (noise > 0). Raises GenerationInfeasibleError
    when the bounds cannot be met for the requested size and dimension."""
    gap = cfg.g - cfg.h
    margin_g = MARGIN * min(1.0 - cfg.g, gap)
    cos_2theta = cfg.g + margin_g
    if cos_2theta >= 1.0 and cfg.n_inliers >= 2:
        raise GenerationInfeasibleError(f"inlier bound g={cfg.g} admits no cap for 2 or more points")
    theta = math.acos(min(1.0, cos_2theta)) / 2.0
    _check_feasible(cfg, theta)

    h_eff = cfg.h - MARGIN * min(1.0 + cfg.h, gap)
    rng = SeededRng(cfg.seed)
    mu = _random_unit(rng.stream(_STREAM_CENTER).generator(), cfg.d)

    in_gen = rng.stream(_STREAM_INLIERS).generator()
    inliers = np.empty((cfg.n_inliers, cfg.d), dtype=np.float32)
    for i in range(cfg.n_inliers):
        inliers[i] = _cap_point(in_gen, mu, theta).astype(np.float32)

    outliers = np.empty((cfg.n_outliers, cfg.d), dtype=np.float32)
    if cfg.n_outliers > 0:
        out_gen = rng.stream(_STREAM_OUTLIERS).generator()
        psi_min = theta + math.acos(max(-1.0, min(1.0, h_eff)))
        if psi_min >= math.pi:
            raise GenerationInfeasibleError(
                f"cross bound h={cfg.h} leaves no room for outliers opposite the inlier cap"
            )
        bound = math.cos(psi_min)
        if cfg.outlier_clusters > 0:
            theta_c = math.acos(CLUSTER_COS) / 2.0
            psi_center = psi_min + theta_c
            if psi_center >= math.pi:
                raise GenerationInfeasibleError(
                    "cross bound leaves no room for clustered outliers"
                )
            center_bound = math.cos(psi_center)
            centers = [
                _place_outlier(out_gen, mu, center_bound, inliers, cfg.h, check=False)
                for _ in range(cfg.outlier_clusters)
            ]
            for i in range(cfg.n_outliers):
                center = centers[i % cfg.outlier_clusters]
                outliers[i] = _resample_until_clear(
                    lambda: _cap_point(out_gen, center, theta_c), inliers, cfg.h
                )
        else:
            for i in range(cfg.n_outliers):
                outliers[i] = _place_outlier(out_gen, mu, bound, inliers, cfg.h, check=True)

    rows = np.vstack([inliers, outliers]) if cfg.n_outliers else inliers
    labels = np.concatenate(
        [np.zeros(cfg.n_inliers, dtype=np.int8), np.ones(cfg.n_outliers, dtype=np.int8)]
    )

    if cfg.noise > 0.0:
        noise_gen = rng.stream(_STREAM_NOISE).generator()
        noisy = rows.astype(np.float64)
        for i in range(rows.shape[0]):
            for _ in range(RETRY_BUDGET):
                v = noisy[i] + cfg.noise * _random_unit(noise_gen, cfg.d)
                n2 = float(np.einsum("k,k->", v, v))
                if n2 > 1e-12:
                    noisy[i] = v / math.sqrt(n2)
                    break
            else:
                raise GenerationInfeasibleError("noise kept cancelling a point exactly")
        rows = noisy.astype(np.float32)

    g_achieved = _pairwise_min(rows[labels == 0])
    h_achieved = _cross_max(rows[labels == 0], rows[labels == 1])
    if cfg.noise == 0.0:
        if g_achieved <= cfg.g or (cfg.n_outliers > 0 and h_achieved >= cfg.h):
            raise GenerationInfeasibleError(
                f"certificate scan failed: g_achieved={g_achieved}, h_achieved={h_achieved}"
            )
    return LabeledSet(EmbeddingSet(rows, normalized=True), labels, g_achieved, h_achieved)


def _place_outlier(gen, mu, bound, inliers, h, check: bool) -> np.ndarray:
    def draw() -> np.ndarray:
        c = _cos_below(gen, mu.shape[0], bound)
        w = _unit_perp(gen, mu)
        return _unit(c * mu + math.sqrt(max(0.0, 1.0 - c * c)) * w)

    if not check:
        return draw().astype(np.float32)
    return _resample_until_clear(draw, inliers, h)


def _resample_until_clear(draw, inliers: np.ndarray, h: float) -> np.ndarray:
    """Resample a candidate until its similarity to every inlier is below h."""
    for _ in range(RETRY_BUDGET):
        cand = draw().astype(np.float32)
        if inliers.shape[0] == 0:
            return cand
        worst = float(kernels.similarity_matrix(cand[None, :], inliers).max())
        if worst < h:
            return cand
    raise GenerationInfeasibleError(
        f"retry budget exhausted while placing an outlier below cross bound h={h}"
    )


def contaminate(clean: LabeledSet, rate: float, pool: LabeledSet, seed: int) -> LabeledSet:
    """Mix outliers drawn from `pool` into the inliers of `clean` so that
    they form `rate` of the result; the order is shuffled deterministically.

    Embedding rows are carried over bit for bit. Non-inlier rows of `clean`
    are dropped; `pool` contributes only rows labeled outlier.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"rate must be in [0, 1), got {rate}")
    inlier_rows = clean.inlier_rows()
    n_in = inlier_rows.shape[0]
    if n_in < 1:
        raise ValueError("clean set has no inliers")
    k = _count_for_rate(rate, n_in)
    pool_rows = pool.outlier_rows()
    if k > pool_rows.shape[0]:
        raise ValueError(f"pool has {pool_rows.shape[0]} outliers, need {k}")
    rng = SeededRng(seed)
    if k > 0:
        picked = pool_rows[sample_without_replacement(rng.stream(_STREAM_PICK), pool_rows.shape[0], k)]
        rows = np.vstack([inlier_rows, picked])
    else:
        picked = pool_rows[:0]
        rows = inlier_rows.copy()
    labels = np.concatenate([np.zeros(n_in, dtype=np.int8), np.ones(k, dtype=np.int8)])
    order = sample_without_replacement(rng.stream(_STREAM_SHUFFLE), rows.shape[0], rows.shape[0])
    h_achieved = _cross_max(inlier_rows, picked)
    return LabeledSet(
        EmbeddingSet(rows[order], normalized=clean.embeddings.normalized),
        labels[order],
        clean.g_achieved,
        h_achieved,
    )


def _count_for_rate(rate: float, n_in: int) -> int:
    """ceil(rate * n / (1 - rate)), robust to float noise on decimal rates."""
    x = rate * n_in / (1.0 - rate)
    nearest = round(x)
    if abs(x - nearest) < 1e-9:
        return int(nearest)
    return math.ceil(x)
