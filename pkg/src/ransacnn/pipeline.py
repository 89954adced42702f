"""End-to-end scoring: inlier score prediction followed by the threshold sweep."""

from __future__ import annotations

from .core import EmbeddingSet, InlierScores, OutlierScores, SeededRng
from .isp import IspConfig, run_isp
from .threshold import TsConfig, run_ts


def ransac_nn_scores(
    emb: EmbeddingSet,
    isp_config: IspConfig | None = None,
    ts_config: TsConfig | None = None,
    rng: SeededRng | None = None,
    threads: int = 0,
) -> tuple[InlierScores, OutlierScores]:
    """Run both stages on a normalized set; returns (inlier, outlier) scores."""
    rng = rng or SeededRng(0)
    eta = run_isp(emb, isp_config, rng, threads)
    sigma = run_ts(emb, eta, ts_config, rng, threads)
    return eta, sigma
