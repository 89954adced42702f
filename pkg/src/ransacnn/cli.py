"""Command-line interface.

Subcommands: score, plan, synth, eval, filter, baseline-knn, sweep, convert.
Every command accepts --seed, prints a reproducibility line (version, seed,
config digest) to stderr, and exits 0 on success, 1 when an evaluation is
undefined, 2 on usage or input errors. Output files are byte-identical
across reruns with the same flags and seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys

import numpy as np

from . import __version__, fileio, kernels
from .baseline import KnnConfig, knn_score
from .core import EmbeddingSet, SeededRng, normalize
from .errors import (
    DegeneratePlanError,
    FileFormatError,
    GenerationInfeasibleError,
    InvalidEmbeddingError,
    UndefinedAucError,
)
from .evaluation import BUILTIN_DETECTORS, contamination_sweep, roc_auc, top_p_filter
from .isp import IspConfig
from .pipeline import ransac_nn_scores
from .planner import make_plan
from .synth import SynthConfig, generate
from .threshold import TsConfig


def _repro_line(command: str, seed: int, params: dict) -> None:
    digest = hashlib.sha256(
        json.dumps({"command": command, **params}, sort_keys=True, default=str).encode()
    ).hexdigest()[:12]
    print(f"ransacnn {__version__} seed={seed} config={digest}", file=sys.stderr)


def _load_normalized(path: str, normalize_flag: bool) -> EmbeddingSet:
    emb = fileio.read_embeddings(path)
    if normalize_flag:
        return normalize(emb)
    if not emb.normalized:
        raise FileFormatError(
            f"{path}: embeddings are not unit length; rerun with --normalize"
        )
    return emb


def cmd_score(args) -> int:
    emb = _load_normalized(args.input, args.normalize)
    isp_config = IspConfig(
        sample_size=args.sample_size,
        sample_fraction=args.sample_frac,
        iterations=None if args.iterations == "auto" else int(args.iterations),
        exclude_self=args.exclude_self,
    )
    m, s = isp_config.resolve(emb.n)
    ts_config = TsConfig(threshold_iterations=args.thresholds, sample_size=m)
    _repro_line("score", args.seed, {
        "input": args.input, "m": m, "s": s, "t": args.thresholds,
        "seed": args.seed, "exclude_self": args.exclude_self,
    })
    print(f"n={emb.n} d={emb.d} m={m} s={s} t={args.thresholds} backend={kernels.backend_name()}",
          file=sys.stderr)
    if args.expected_outlier_frac is not None:
        plan = make_plan(emb.n, round(args.expected_outlier_frac * emb.n), m, args.confidence)
        print(
            f"plan: p_clean={plan.p_clean_exact:.9g} p_out={plan.p_out_exact:.9g} "
            f"s_min={plan.s_min}", file=sys.stderr,
        )
        if plan.hazard:
            print(
                f"hazard: all-outlier sample probability {plan.p_out_exact:.3g} exceeds "
                f"{1e-3:g}; increase the sample size", file=sys.stderr,
            )
        if s < plan.s_min:
            print(
                f"hazard: {s} iterations fall short of s_min={plan.s_min} for "
                f"confidence {plan.confidence}", file=sys.stderr,
            )
    rng = SeededRng(args.seed)
    eta, sigma = ransac_nn_scores(emb, isp_config, ts_config, rng, args.threads)
    print(f"threshold iterations completed: {sigma.completed_iterations}", file=sys.stderr)
    fileio.write_scores(args.output, sigma)
    if args.emit_inlier_scores:
        fileio.write_scores(args.emit_inlier_scores, eta)
    return 0


def cmd_plan(args) -> int:
    _repro_line("plan", args.seed, {"n": args.n, "l": args.l, "m": args.m,
                                    "confidence": args.confidence})
    plan = make_plan(args.n, args.l, args.m, args.confidence)
    print(f"p_clean_exact={plan.p_clean_exact:.9g}")
    print(f"p_clean_approx={plan.p_clean_approx:.9g}")
    print(f"p_out_exact={plan.p_out_exact:.9g}")
    print(f"p_out_approx={plan.p_out_approx:.9g}")
    print(f"s_min={plan.s_min}")
    print(f"hazard={'on' if plan.hazard else 'off'}")
    return 0


def cmd_synth(args) -> int:
    cfg = SynthConfig(
        n_inliers=args.n_inliers,
        n_outliers=args.n_outliers,
        d=args.d,
        g=args.g,
        h=args.h,
        noise=args.noise,
        outlier_clusters=args.outlier_clusters,
        seed=args.seed,
    )
    _repro_line("synth", args.seed, vars(cfg).copy())
    labeled = generate(cfg)
    fileio.write_embeddings(args.out, labeled.embeddings)
    fileio.write_labels(args.labels, labeled.labels)
    print(f"certificate: g_achieved={labeled.g_achieved:.9g} h_achieved={labeled.h_achieved:.9g}",
          file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    _repro_line("eval", args.seed, {"scores": args.scores, "labels": args.labels})
    scores = fileio.read_scores(args.scores)
    labels = fileio.read_labels(args.labels, n=scores.shape[0])
    report = roc_auc(scores, labels)
    print(f"roc_auc={report.roc_auc:.9g}")
    print(f"n_pos={report.n_pos}")
    print(f"n_neg={report.n_neg}")
    print(f"ties={'yes' if report.ties_present else 'no'}")
    return 0


def cmd_filter(args) -> int:
    _repro_line("filter", args.seed, {"scores": args.scores, "top_p": args.top_p})
    scores = fileio.read_scores(args.scores)
    labels = fileio.read_labels(args.labels, n=scores.shape[0]) if args.labels else None
    report = top_p_filter(scores, args.top_p, labels)
    fileio.write_keep_list(args.out, report.kept_indices)
    print(f"kept={report.kept_indices.shape[0]}")
    print(f"threshold_score={report.threshold_score:.9g}")
    if labels is not None:
        print(f"tp={report.tp} fp={report.fp} tn={report.tn} fn={report.fn}")
        print(f"mcc={report.mcc:.9g}")
    return 0


def cmd_baseline_knn(args) -> int:
    _repro_line("baseline-knn", args.seed, {"train": args.train, "test": args.test, "k": args.k})
    train = _load_normalized(args.train, args.normalize)
    test = _load_normalized(args.test, args.normalize)
    scores = knn_score(train, test, KnnConfig(k=args.k), args.threads)
    fileio.write_scores(args.out, scores)
    return 0


def cmd_sweep(args) -> int:
    rates = [float(r) for r in args.rates.split(",") if r]
    names = [name for name in args.detectors.split(",") if name]
    unknown = [name for name in names if name not in BUILTIN_DETECTORS]
    if unknown:
        raise ValueError(f"unknown detectors: {unknown}; available: {sorted(BUILTIN_DETECTORS)}")
    _repro_line("sweep", args.seed, {
        "rates": rates, "detectors": names, "seeds": args.seeds,
        "n_inliers": args.n_inliers, "d": args.d, "g": args.g, "h": args.h,
        "noise": args.noise, "train_contamination": args.train_contamination,
    })
    cfg = SynthConfig(
        n_inliers=args.n_inliers,
        n_outliers=0,
        d=args.d,
        g=args.g,
        h=args.h,
        noise=args.noise,
        outlier_clusters=args.outlier_clusters,
        seed=args.seed,
    )
    detectors = {name: BUILTIN_DETECTORS[name]() for name in names}
    result = contamination_sweep(
        cfg,
        detectors,
        rates=rates,
        seeds=range(args.seed, args.seed + args.seeds),
        train_contamination=args.train_contamination,
        perturbation=args.perturbation,
    )
    print(result.to_table())
    if args.report:
        fileio.write_sweep_records(args.report, result.to_records())
    return 0


def cmd_convert(args) -> int:
    _repro_line("convert", args.seed, {"csv": args.csv, "out": args.out})
    emb = fileio.csv_to_embeddings(args.csv)
    if args.normalize:
        emb = normalize(emb)
    fileio.write_embeddings(args.out, emb)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ransacnn",
        description="Training-free outlier scoring for embedding sets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="run both scoring stages on an RNNE file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--sample-frac", type=float, default=None)
    group.add_argument("--sample-size", type=int, default=None)
    p.add_argument("--iterations", default="auto", help="iteration count or 'auto' for ceil(n/m)")
    p.add_argument("--thresholds", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--exclude-self", action="store_true")
    p.add_argument("--emit-inlier-scores", default=None)
    p.add_argument("--expected-outlier-frac", type=float, default=None)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--threads", type=int, default=0)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("plan", help="sampling probabilities and iteration bound")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("synth", help="generate a labeled synthetic set")
    p.add_argument("--n-inliers", type=int, required=True)
    p.add_argument("--n-outliers", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--outlier-clusters", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--labels", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="ROC-AUC of a score file against labels")
    p.add_argument("--scores", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("filter", help="keep the lowest-scored top-p percent")
    p.add_argument("--scores", required=True)
    p.add_argument("--top-p", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--labels", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("baseline-knn", help="k-th nearest neighbor distance scores")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", required=True)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=0)
    p.set_defaults(func=cmd_baseline_knn)

    p = sub.add_parser("sweep", help="mean ROC-AUC per contamination level")
    p.add_argument("--n-inliers", type=int, default=400)
    p.add_argument("--d", type=int, default=32)
    p.add_argument("--g", type=float, default=0.8)
    p.add_argument("--h", type=float, default=0.2)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--outlier-clusters", type=int, default=9)
    p.add_argument("--rates", default="0.05,0.1,0.2,0.4")
    p.add_argument("--seeds", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--detectors", default="ransac-nn,knn")
    p.add_argument("--train-contamination", choices=["match", "none"], default="match")
    p.add_argument("--perturbation", type=float, default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("convert", help="import a plain CSV matrix as RNNE")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_convert)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UndefinedAucError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        FileFormatError,
        InvalidEmbeddingError,
        DegeneratePlanError,
        GenerationInfeasibleError,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
