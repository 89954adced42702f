"""Evaluation and filtering: ROC-AUC, MCC, top-p filtering, contamination sweeps.

ROC-AUC follows the rank-statistic definition with midrank tie handling:
the probability that a uniformly chosen outlier outscores a uniformly
chosen inlier, ties counting one half. Filtering keeps the items with the
lowest outlier scores, breaking ties by original index so results are
stable across runs and platforms.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .baseline import KnnConfig, knn_score
from .core import EmbeddingSet, OutlierScores, SeededRng, sample_without_replacement
from .errors import UndefinedAucError
from .isp import IspConfig
from .pipeline import ransac_nn_scores
from .synth import LabeledSet, SynthConfig, contaminate, generate
from .threshold import TsConfig

_STREAM_SPLIT = 6
_STREAM_DETECT = 7


@dataclass(frozen=True)
class EvalReport:
    roc_auc: float
    n_pos: int
    n_neg: int
    ties_present: bool


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j + 2) / 2.0  # 1-based midrank
        i = j + 1
    return ranks


def roc_auc(scores, labels) -> EvalReport:
    """Mann-Whitney ROC-AUC of outlier scores against 0/1 labels (1 = outlier)."""
    values = scores.values if isinstance(scores, OutlierScores) else np.asarray(scores, dtype=np.float64)
    flags = np.asarray(labels)
    if flags.shape != values.shape:
        raise ValueError(f"scores and labels differ in length: {values.shape} vs {flags.shape}")
    pos = flags == 1
    n_pos = int(np.sum(pos))
    n_neg = int(values.shape[0] - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAucError("need at least one outlier and one inlier label")
    ranks = _midranks(values)
    u = float(np.sum(ranks[pos])) - n_pos * (n_pos + 1) / 2.0
    auc = u / (n_pos * n_neg)
    ties = bool(np.unique(values).shape[0] < values.shape[0])
    return EvalReport(roc_auc=auc, n_pos=n_pos, n_neg=n_neg, ties_present=ties)


def mcc(tp: int, fp: int, tn: int, fn: int) -> float:
    """Matthews correlation coefficient; 0 when any marginal is empty."""
    if min(tp, fp, tn, fn) < 0:
        raise ValueError("confusion counts must be non-negative")
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denom)


@dataclass(frozen=True)
class FilterReport:
    """Result of keeping the lowest-scored p percent.

    When labels are supplied, kept items are treated as predicted inliers:
    tp counts kept inliers, fp kept outliers, fn dropped inliers, tn
    dropped outliers; mcc summarizes that confusion matrix.
    """

    p: float
    kept_indices: np.ndarray
    threshold_score: float
    tp: int | None = None
    fp: int | None = None
    tn: int | None = None
    fn: int | None = None
    mcc: float | None = None


def top_p_filter(scores, p: float, labels=None) -> FilterReport:
    """Keep the ceil(p * n / 100) items with the lowest outlier scores."""
    values = scores.values if isinstance(scores, OutlierScores) else np.asarray(scores, dtype=np.float64)
    if not 0.0 < p <= 100.0:
        raise ValueError(f"p must be in (0, 100], got {p}")
    n = values.shape[0]
    if float(p).is_integer():
        n_keep = -(-int(p) * n // 100)
    else:
        n_keep = math.ceil(p * n / 100.0)
    order = np.lexsort((np.arange(n), values))
    kept = np.sort(order[:n_keep])
    threshold_score = float(values[order[n_keep - 1]])
    if labels is None:
        return FilterReport(p=p, kept_indices=kept, threshold_score=threshold_score)
    flags = np.asarray(labels)
    keep_mask = np.zeros(n, dtype=bool)
    keep_mask[kept] = True
    tp = int(np.sum(keep_mask & (flags == 0)))
    fp = int(np.sum(keep_mask & (flags == 1)))
    fn = int(np.sum(~keep_mask & (flags == 0)))
    tn = int(np.sum(~keep_mask & (flags == 1)))
    return FilterReport(
        p=p,
        kept_indices=kept,
        threshold_score=threshold_score,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        mcc=mcc(tp, fp, tn, fn),
    )


# A detector scores the test set, optionally using the train set.
Detector = Callable[[LabeledSet, LabeledSet, SeededRng], np.ndarray]


def ransac_detector(
    isp_config: IspConfig | None = None,
    ts_config: TsConfig | None = None,
    threads: int = 0,
) -> Detector:
    """Training-free detector: scores the test set directly."""

    def detect(train: LabeledSet, test: LabeledSet, rng: SeededRng) -> np.ndarray:
        _, sigma = ransac_nn_scores(test.embeddings, isp_config, ts_config, rng, threads)
        return sigma.values

    return detect


def knn_detector(config: KnnConfig | None = None, threads: int = 0) -> Detector:
    """Trains on the train split (nearest-neighbor memorization)."""

    def detect(train: LabeledSet, test: LabeledSet, rng: SeededRng) -> np.ndarray:
        return knn_score(train.embeddings, test.embeddings, config, threads).values

    return detect


BUILTIN_DETECTORS: Mapping[str, Callable[[], Detector]] = {
    "ransac-nn": ransac_detector,
    "knn": knn_detector,
}


@dataclass(frozen=True)
class SweepCell:
    rate: float
    seed: int
    detector: str
    auc: float


@dataclass(frozen=True)
class SweepResult:
    cells: tuple[SweepCell, ...]
    rates: tuple[float, ...]
    detectors: tuple[str, ...]

    def summary(self) -> dict[tuple[str, float], tuple[float, float]]:
        """Mean and sample standard deviation of AUC per (detector, rate)."""
        out: dict[tuple[str, float], tuple[float, float]] = {}
        for name in self.detectors:
            for rate in self.rates:
                aucs = [c.auc for c in self.cells if c.detector == name and c.rate == rate]
                mean = statistics.fmean(aucs)
                std = statistics.stdev(aucs) if len(aucs) > 1 else 0.0
                out[(name, rate)] = (mean, std)
        return out

    def to_table(self) -> str:
        """Fixed-width table, one detector per row, one rate per column."""
        summary = self.summary()
        headers = [f"{rate:.0%}" for rate in self.rates]
        name_w = max([len("detector")] + [len(name) for name in self.detectors])
        col_w = max([13] + [len(head) for head in headers])
        lines = ["detector".ljust(name_w) + "".join(head.rjust(col_w) for head in headers)]
        for name in self.detectors:
            cells = []
            for rate in self.rates:
                mean, std = summary[(name, rate)]
                cells.append(f"{mean:.3f}+-{std:.3f}".rjust(col_w))
            lines.append(name.ljust(name_w) + "".join(cells))
        return "\n".join(lines)

    def to_records(self) -> list[dict]:
        return [
            {"rate": c.rate, "seed": c.seed, "detector": c.detector, "auc": c.auc}
            for c in self.cells
        ]


def _split_inliers(pool: LabeledSet, rng: SeededRng) -> tuple[np.ndarray, np.ndarray]:
    idx = np.flatnonzero(pool.labels == 0)
    half = idx.shape[0] // 2
    perm = sample_without_replacement(rng, idx.shape[0], idx.shape[0])
    return idx[perm[:half]], idx[perm[half:]]


def _outliers_needed(rate: float, n_in: int) -> int:
    if rate <= 0.0:
        return 0
    x = rate * n_in / (1.0 - rate)
    nearest = round(x)
    return int(nearest) if abs(x - nearest) < 1e-9 else math.ceil(x)


def contamination_sweep(
    cfg: SynthConfig,
    detectors: Mapping[str, Detector],
    rates: Sequence[float] = (0.05, 0.10, 0.20, 0.40),
    seeds: Sequence[int] = tuple(range(6)),
    train_contamination: str = "match",
    perturbation: float | None = None,
) -> SweepResult:
    """Evaluate detectors across contamination levels.

    Per (rate, seed) cell: generate a labeled pool, split its inliers into
    train/test halves, contaminate the train half at the rate (or leave it
    clean with train_contamination="none"), perturb the test half at the
    rate (or at the fixed `perturbation` level when given), run each
    detector, and record the test ROC-AUC. cfg.n_outliers is ignored; the
    outlier pool is sized to cover the requested rates.
    """
    if train_contamination not in ("match", "none"):
        raise ValueError('train_contamination must be "match" or "none"')
    cells = []
    for seed in seeds:
        half = cfg.n_inliers // 2
        worst = max(
            [_outliers_needed(r, cfg.n_inliers - half) for r in rates]
            + [_outliers_needed(perturbation or 0.0, cfg.n_inliers - half)]
        )
        pool_cfg = replace(cfg, seed=seed, n_outliers=2 * worst + 2)
        pool = generate(pool_cfg)
        split_rng = SeededRng(seed).stream(_STREAM_SPLIT)
        train_idx, test_idx = _split_inliers(pool, split_rng)
        out_idx = np.flatnonzero(pool.labels == 1)
        contam_pool = pool.take(np.concatenate([train_idx, out_idx[: out_idx.shape[0] // 2]]))
        perturb_pool = pool.take(np.concatenate([test_idx, out_idx[out_idx.shape[0] // 2 :]]))
        for rate in rates:
            train_rate = rate if train_contamination == "match" else 0.0
            test_rate = perturbation if perturbation is not None else rate
            train = contaminate(pool.take(train_idx), train_rate, contam_pool, seed=seed * 7919 + 1)
            test = contaminate(pool.take(test_idx), test_rate, perturb_pool, seed=seed * 7919 + 2)
            for name, detector in detectors.items():
                scores = detector(train, test, SeededRng(seed).stream(_STREAM_DETECT))
                cells.append(
                    SweepCell(rate=rate, seed=int(seed), detector=name,
                              auc=roc_auc(scores, test.labels).roc_auc)
                )
    return SweepResult(cells=tuple(cells), rates=tuple(rates), detectors=tuple(detectors))
