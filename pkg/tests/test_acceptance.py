"""Acceptance suite: one test per release criterion.

Each test prints a single "ACCEPTANCE <name>: PASS/FAIL" line (visible with
pytest -s or in captured output) and asserts the criterion at its stated
tolerance and runtime budget.
"""

import math
import multiprocessing
import statistics
import time
import warnings

import numpy as np
import pytest

import ransacnn as r
from conftest import unit_rows
from ransacnn import kernels
from ransacnn.core import SeededRng, sample_without_replacement
from ransacnn.evaluation import roc_auc, top_p_filter
from ransacnn.threshold import inverted_isp_scores

warnings.filterwarnings("ignore", category=RuntimeWarning)


def _report(name: str, ok: bool, detail: str = ""):
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, f"{name} failed: {detail}"


# --- criterion 1: oracle equivalence -----------------------------------

def test_oracle_equivalence():
    gen = np.random.default_rng(7)
    start = time.perf_counter()
    instances = 0
    for _ in range(100):
        n = int(gen.integers(2, 201))
        d = int(gen.integers(2, 17))
        m = int(gen.integers(1, min(n, 25) + 1))
        s = int(gen.integers(1, 11))
        t = int(gen.integers(1, 26))
        emb = r.normalize(r.EmbeddingSet(unit_rows(int(gen.integers(1 << 30)), n, d)))
        rng = SeededRng(int(gen.integers(1 << 62)))
        icfg = r.IspConfig(sample_size=m, iterations=s)
        eta = r.run_isp(emb, icfg, rng)
        eta_o = r.run_isp_oracle(emb, icfg, rng)
        assert np.array_equal(eta.values, eta_o.values), "isp mismatch"
        tcfg = r.TsConfig(threshold_iterations=t, sample_size=m)
        sig = r.run_ts(emb, eta, tcfg, rng)
        sig_o = r.run_ts_oracle(emb, eta_o, tcfg, rng)
        assert np.array_equal(sig.values, sig_o.values), "ts mismatch"
        assert sig.completed_iterations == sig_o.completed_iterations
        instances += 1
    elapsed = time.perf_counter() - start
    _report(
        "oracle_equivalence",
        instances == 100 and elapsed < 10.0,
        f"({instances} instances bit-identical in {elapsed:.1f}s, budget 10s)",
    )


# --- criterion 2: planner exactness ------------------------------------

_MC_GRID = [
    (20, 2, 3), (20, 6, 5), (20, 10, 2), (50, 5, 4), (50, 20, 3), (50, 24, 10),
    (100, 10, 5), (100, 30, 4), (100, 45, 2), (200, 20, 6), (200, 60, 3), (200, 90, 5),
]
_MC_TRIALS = 100_000


def _mc_cell(args):
    cfg_i, (n, l, m) = args
    rng = SeededRng(1234, stream_id=(cfg_i + 1) << 33)
    clean = out = 0
    for t in range(_MC_TRIALS):
        idx = sample_without_replacement(rng.stream(t), n, m)
        hits = int(np.sum(idx < l))
        clean += hits == 0
        out += hits == m
    return n, l, m, clean, out


def test_planner_exactness():
    start = time.perf_counter()
    with multiprocessing.get_context("fork").Pool(2) as pool:
        results = pool.map(_mc_cell, list(enumerate(_MC_GRID)))
    worst = 0.0
    for n, l, m, clean, out in results:
        for stat, p in ((clean, r.p_clean(n, l, m)[0]), (out, r.p_out(n, l, m)[0])):
            se = math.sqrt(p * (1 - p) / _MC_TRIALS)
            if p in (0.0, 1.0):
                assert stat == p * _MC_TRIALS, (n, l, m)
            else:
                worst = max(worst, abs(stat / _MC_TRIALS - p) / se)
    sm_ok = r.s_min(0.46667, 0.95) == 5 and r.s_min(0.5, 0.999) == 10
    elapsed = time.perf_counter() - start
    _report(
        "planner_exactness",
        worst <= 3.0 and sm_ok and elapsed < 30.0,
        f"(worst deviation {worst:.2f} SE over 12 configs x 1e5 draws, "
        f"s_min examples exact, {elapsed:.1f}s, budget 30s)",
    )


# --- criterion 3: Case-1 separation ------------------------------------

def test_case1_separation():
    levels = (0.05, 0.10, 0.20, 0.40)
    detail = []
    ok = True
    for rate in levels:
        start = time.perf_counter()
        perfect = 0
        for seed in range(20):
            n_out = round(rate * 1000)
            ls = r.generate(r.SynthConfig(n_inliers=1000 - n_out, n_outliers=n_out,
                                          d=32, g=0.8, h=0.2, seed=seed))
            _, sigma = r.ransac_nn_scores(ls.embeddings, rng=SeededRng(seed + 4242))
            perfect += roc_auc(sigma, ls.labels).roc_auc == 1.0
        elapsed = time.perf_counter() - start
        ok = ok and perfect >= 19 and elapsed < 60.0
        detail.append(f"{rate:.0%}:{perfect}/20 in {elapsed:.0f}s")
    _report("case1_separation", ok, "(" + ", ".join(detail) + ", budget 60s/level)")


# --- criterion 4: threshold sweep beats inverted inlier scores ---------

def _ablation_means(rate: float, seeds=range(20)):
    n_total = 400
    n_out = round(rate * n_total)
    ts_scores, inv_scores = [], []
    for seed in seeds:
        ls = r.generate(r.SynthConfig(n_inliers=n_total - n_out, n_outliers=n_out,
                                      d=16, g=0.6, h=0.45, noise=1.5, seed=seed))
        rng = SeededRng(seed + 1000)
        eta = r.run_isp(ls.embeddings, r.IspConfig(), rng)
        sig = r.run_ts(ls.embeddings, eta, r.TsConfig(), rng)
        ts_scores.append(roc_auc(sig, ls.labels).roc_auc)
        inv_scores.append(roc_auc(inverted_isp_scores(eta), ls.labels).roc_auc)
    return statistics.fmean(ts_scores), statistics.fmean(inv_scores)


def test_ablation_sweep_beats_inverted_scores():
    ts_low, inv_low = _ablation_means(0.10)
    ts_high, inv_high = _ablation_means(0.40)
    gap_low = ts_low - inv_low
    gap_high = ts_high - inv_high
    ok = ts_low >= inv_low and ts_high >= inv_high and gap_high > gap_low
    _report(
        "ts_ablation",
        ok,
        f"(mean AUC sweep vs inverted: 10% {ts_low:.4f}/{inv_low:.4f} gap {gap_low:+.4f}; "
        f"40% {ts_high:.4f}/{inv_high:.4f} gap {gap_high:+.4f}; gap largest at 40%)",
    )


# --- criterion 5: sample size and iteration sweep ----------------------

def _sweep_mean_auc(m: int, iterations: int, seeds=range(10)):
    aucs = []
    for seed in seeds:
        ls = r.generate(r.SynthConfig(n_inliers=120, n_outliers=80, d=32, g=0.8, h=0.2,
                                      outlier_clusters=5, seed=seed))
        rng = SeededRng(seed + 77)
        eta = r.run_isp(ls.embeddings, r.IspConfig(sample_size=m, iterations=iterations), rng)
        sig = r.run_ts(ls.embeddings, eta, r.TsConfig(sample_size=m), rng)
        aucs.append(roc_auc(sig, ls.labels).roc_auc)
    return statistics.fmean(aucs)


def test_sample_size_iteration_sweep():
    n_total = 200
    s_grid = (2, 8, 32, 128)
    curves = {}
    for frac in (0.01, 0.10, 0.20):
        m = max(1, math.ceil(frac * n_total))
        curves[frac] = [_sweep_mean_auc(m, s) for s in s_grid]
    tiny = curves[0.01]
    hazard_ok = tiny[-1] <= tiny[0] - 0.10
    healthy_ok = True
    for frac in (0.10, 0.20):
        curve = curves[frac]
        steps_ok = all(b >= a - 0.05 for a, b in zip(curve, curve[1:]))
        healthy_ok = healthy_ok and steps_ok and curve[-1] >= curve[0] and curve[-1] >= 0.9
    fmt = {f"{k:.0%}": "->".join(f"{v:.2f}" for v in vs) for k, vs in curves.items()}
    _report(
        "sample_size_iteration_sweep",
        hazard_ok and healthy_ok,
        f"(mean AUC by iterations {s_grid}: {fmt})",
    )


# --- criterion 6: contaminated-training drop and filtering recovery ----

def test_contamination_drop_and_filter_recovery():
    drops, recoveries = [], []
    for seed in range(6):
        pool = r.generate(r.SynthConfig(n_inliers=600, n_outliers=400, d=32, g=0.8, h=0.2,
                                        outlier_clusters=9, noise=0.5, seed=seed))
        in_idx = np.flatnonzero(pool.labels == 0)
        out_idx = np.flatnonzero(pool.labels == 1)
        perm = sample_without_replacement(SeededRng(seed).stream(500), in_idx.size, in_idx.size)
        tr_in, te_in = in_idx[perm[:300]], in_idx[perm[300:]]
        operm = sample_without_replacement(SeededRng(seed).stream(501), out_idx.size, out_idx.size)
        contam_pool = pool.take(np.concatenate([tr_in, out_idx[operm[:200]]]))
        perturb_pool = pool.take(np.concatenate([te_in, out_idx[operm[200:]]]))

        clean_train = pool.take(tr_in)
        contam_train = r.contaminate(clean_train, 0.4, contam_pool, seed=seed * 31 + 1)
        test = r.contaminate(pool.take(te_in), 0.4, perturb_pool, seed=seed * 31 + 2)

        cfg = r.KnnConfig(k=5)
        auc_clean = roc_auc(r.knn_score(clean_train.embeddings, test.embeddings, cfg), test.labels).roc_auc
        auc_contam = roc_auc(r.knn_score(contam_train.embeddings, test.embeddings, cfg), test.labels).roc_auc
        _, sigma = r.ransac_nn_scores(contam_train.embeddings, rng=SeededRng(seed + 9000))
        filtered = contam_train.take(top_p_filter(sigma, 60.0).kept_indices)
        auc_filtered = roc_auc(r.knn_score(filtered.embeddings, test.embeddings, cfg), test.labels).roc_auc
        drops.append(auc_clean - auc_contam)
        recoveries.append(auc_filtered - auc_contam)
    mean_drop = statistics.fmean(drops)
    mean_recovery = statistics.fmean(recoveries)
    ok = mean_drop >= 0.05 and mean_recovery >= 0.5 * mean_drop
    _report(
        "contamination_drop_filter_recovery",
        ok,
        f"(mean drop {mean_drop:.3f} >= 0.05; mean recovery {mean_recovery:.3f} "
        f">= half the drop, 6 seeds)",
    )


# --- criterion 7: complexity scaling ------------------------------------

def _time_isp(emb, m, s):
    best = math.inf
    for rep in range(3):
        rng = SeededRng(rep)
        start = time.perf_counter()
        r.run_isp(emb, r.IspConfig(sample_size=m, iterations=s), rng)
        best = min(best, time.perf_counter() - start)
    return best


def test_complexity_scaling():
    n, d, m, s = 10_000, 128, 50, 8
    rows = unit_rows(99, 2 * n, d)
    base_emb = r.EmbeddingSet(rows[:n], normalized=True)
    big_emb = r.EmbeddingSet(rows, normalized=True)
    _time_isp(base_emb, m, s)  # warm-up
    base = _time_isp(base_emb, m, s)
    ratios = {
        "n": _time_isp(big_emb, m, s) / base,
        "m": _time_isp(base_emb, 2 * m, s) / base,
        "s": _time_isp(base_emb, m, 2 * s) / base,
    }
    ok = all(rv <= 4.0 for rv in ratios.values())
    detail = ", ".join(f"2x{k}: {v:.2f}x" for k, v in ratios.items())
    _report("complexity_scaling", ok, f"(base {base*1e3:.0f}ms; {detail}; bound 4x)")


# --- criterion 8: ROC-AUC and MCC correctness ---------------------------

def test_roc_auc_correctness():
    gen = np.random.default_rng(123)
    worst = 0.0
    for _ in range(50):
        n = int(gen.integers(4, 501))
        scores = np.round(gen.uniform(0, 1, n), int(gen.integers(1, 4)))
        labels = gen.integers(0, 2, n)
        labels[:2] = [0, 1]
        got = roc_auc(scores, labels).roc_auc
        pos = scores[labels == 1]
        neg = scores[labels == 0]
        wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
        want = wins / (pos.size * neg.size)
        worst = max(worst, abs(got - want))
    mcc_val = r.mcc(4, 1, 5, 0)
    mcc_ok = abs(mcc_val - 0.8165) <= 1e-4
    _report(
        "roc_auc_correctness",
        worst <= 1e-12 and mcc_ok,
        f"(50 instances, worst |diff| {worst:.2e} <= 1e-12; mcc(4,1,5,0)={mcc_val:.5f})",
    )


# --- criterion 9: determinism and format --------------------------------

def test_determinism_and_format(tmp_path, capsys):
    from ransacnn.cli import main
    from ransacnn.fileio import read_embeddings, write_embeddings

    def run(*argv):
        assert main(list(argv)) == 0
        return capsys.readouterr().out.encode()

    outputs = {}
    for tag in ("one", "two"):
        base = tmp_path / tag
        base.mkdir()
        emb, lab = base / "set.rnne", base / "labels.csv"
        stdouts = []
        stdouts.append(run("synth", "--n-inliers", "90", "--n-outliers", "30", "--d", "8",
                           "--g", "0.75", "--h", "0.2", "--seed", "5",
                           "--out", str(emb), "--labels", str(lab)))
        sig = base / "sigma.csv"
        stdouts.append(run("score", "--input", str(emb), "--output", str(sig),
                           "--seed", "11", "--thresholds", "100"))
        keep = base / "keep.csv"
        stdouts.append(run("filter", "--scores", str(sig), "--top-p", "75",
                           "--out", str(keep), "--labels", str(lab)))
        knn = base / "knn.csv"
        stdouts.append(run("baseline-knn", "--train", str(emb), "--test", str(emb),
                           "--k", "3", "--out", str(knn)))
        stdouts.append(run("eval", "--scores", str(sig), "--labels", str(lab)))
        stdouts.append(run("plan", "--n", "90", "--l", "30", "--m", "9"))
        csv_src = base / "m.csv"
        csv_src.write_text("3.0,4.0\n1.0,0.0\n")
        rnne2 = base / "m.rnne"
        stdouts.append(run("convert", "--csv", str(csv_src), "--out", str(rnne2), "--normalize"))
        report = base / "cells.jsonl"
        stdouts.append(run("sweep", "--n-inliers", "60", "--d", "8", "--g", "0.75",
                           "--h", "0.2", "--rates", "0.25", "--seeds", "2",
                           "--detectors", "knn", "--outlier-clusters", "3",
                           "--report", str(report)))
        files = [p.read_bytes() for p in (emb, lab, sig, keep, knn, rnne2, report)]
        outputs[tag] = (files, stdouts)
    reruns_identical = outputs["one"] == outputs["two"]

    src = tmp_path / "one" / "set.rnne"
    copy = tmp_path / "copy.rnne"
    write_embeddings(copy, read_embeddings(src))
    round_trip = src.read_bytes() == copy.read_bytes()

    _report(
        "determinism_and_format",
        reruns_identical and round_trip,
        "(all 8 commands rerun byte-identical in files and stdout; "
        "RNNE round-trip byte-identical)",
    )
