"""Training-free outlier detection for contaminated embedding sets.

Two sampling stages produce the scores: repeated uniform sub-sampling with
worst-case nearest-neighbor aggregation yields per-item inlier scores, and
a rising-threshold filtered resampling sweep refines them into outlier
scores in [0, 1]. A probability planner, a certified synthetic generator,
a kNN-distance baseline, and an evaluation/filtering toolchain round out
the package; everything is reproducible from a single 64-bit seed.
"""

__version__ = "0.1.0"

from .baseline import KnnConfig, knn_score
from .core import (
    EmbeddingSet,
    InlierScores,
    OutlierScores,
    SeededRng,
    cosine_similarity,
    normalize,
    sample_without_replacement,
)
from .errors import (
    DegeneratePlanError,
    FileFormatError,
    GenerationInfeasibleError,
    InvalidEmbeddingError,
    UndefinedAucError,
)
from .evaluation import (
    EvalReport,
    FilterReport,
    SweepResult,
    contamination_sweep,
    knn_detector,
    mcc,
    ransac_detector,
    roc_auc,
    top_p_filter,
)
from .isp import IspConfig, run_isp, run_isp_oracle
from .pipeline import ransac_nn_scores
from .planner import SamplingPlan, make_plan, p_clean, p_out, s_min
from .synth import LabeledSet, SynthConfig, contaminate, generate
from .threshold import TsConfig, inverted_isp_scores, run_ts, run_ts_oracle

__all__ = [
    "__version__",
    "EmbeddingSet",
    "InlierScores",
    "OutlierScores",
    "SeededRng",
    "cosine_similarity",
    "normalize",
    "sample_without_replacement",
    "IspConfig",
    "run_isp",
    "run_isp_oracle",
    "TsConfig",
    "run_ts",
    "run_ts_oracle",
    "inverted_isp_scores",
    "ransac_nn_scores",
    "SamplingPlan",
    "make_plan",
    "p_clean",
    "p_out",
    "s_min",
    "SynthConfig",
    "LabeledSet",
    "generate",
    "contaminate",
    "KnnConfig",
    "knn_score",
    "EvalReport",
    "FilterReport",
    "SweepResult",
    "roc_auc",
    "mcc",
    "top_p_filter",
    "contamination_sweep",
    "ransac_detector",
    "knn_detector",
    "DegeneratePlanError",
    "FileFormatError",
    "GenerationInfeasibleError",
    "InvalidEmbeddingError",
    "UndefinedAucError",
]
