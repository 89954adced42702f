"""Sampling probabilities and minimum-iteration planning.

For a set of n items containing l outliers and a sample of size m drawn
without replacement:

    p_clean = C(n-l, m) / C(n, m)   approximately (1 - l/n)^m
    p_out   = C(l, m)   / C(n, m)   approximately (l/n)^m

and the minimum number of iterations to draw at least one clean sample with
confidence c is ceil(log(1-c) / log(1-p_clean)). Binomials are evaluated
through log-gamma so the exact forms stay usable at n around 10^6.

Note on p_out: the all-outlier probability is sometimes printed as
C(l,m) * C(n-l, n-m) / C(n,m), which vanishes unless m = l and contradicts
its own (l/n)^m approximation; the standard hypergeometric form above is
what is implemented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gammaln

from .errors import DegeneratePlanError

#: make_plan flags a hazard when the all-outlier probability exceeds this.
HAZARD_P_OUT = 1e-3


def log_choose(n: int, k: int) -> float:
    """log C(n, k); -inf when k is outside [0, n]."""
    if k < 0 or k > n:
        return -math.inf
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def _validate(n: int, l: int, m: int) -> None:
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if not 0 <= l <= n:
        raise ValueError(f"need 0 <= l <= n, got l={l}, n={n}")
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")


def p_clean(n: int, l: int, m: int) -> tuple[float, float]:
    """Probability that a sample of m is all inliers: (exact, approximation)."""
    _validate(n, l, m)
    if m > n - l:
        exact = 0.0
    else:
        exact = math.exp(log_choose(n - l, m) - log_choose(n, m))
    return min(1.0, exact), (1.0 - l / n) ** m


def p_out(n: int, l: int, m: int) -> tuple[float, float]:
    """Probability that a sample of m is all outliers: (exact, approximation)."""
    _validate(n, l, m)
    if m > l:
        exact = 0.0
    else:
        exact = math.exp(log_choose(l, m) - log_choose(n, m))
    return min(1.0, exact), (l / n) ** m


def s_min(p_clean_value: float, confidence: float) -> int:
    """Iterations needed to draw at least one clean sample at the confidence."""
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must be in (0, 1), got {confidence}")
    if p_clean_value >= 1.0:
        return 1
    if p_clean_value <= 0.0:
        raise DegeneratePlanError("clean samples are impossible; no iteration count reaches the confidence")
    return max(1, math.ceil(math.log(1.0 - confidence) / math.log(1.0 - p_clean_value)))


@dataclass(frozen=True)
class SamplingPlan:
    n: int
    l: int
    m: int
    confidence: float
    p_clean_exact: float
    p_clean_approx: float
    p_out_exact: float
    p_out_approx: float
    s_min: int
    hazard: bool


def make_plan(n: int, l: int, m: int, confidence: float = 0.95,
              hazard_threshold: float = HAZARD_P_OUT) -> SamplingPlan:
    """Assemble a full sampling plan and flag all-outlier-sample hazards."""
    _validate(n, l, m)
    if l >= n:
        raise ValueError(f"outlier count must be below n, got l={l}, n={n}")
    pc_exact, pc_approx = p_clean(n, l, m)
    po_exact, po_approx = p_out(n, l, m)
    return SamplingPlan(
        n=n,
        l=l,
        m=m,
        confidence=confidence,
        p_clean_exact=pc_exact,
        p_clean_approx=pc_approx,
        p_out_exact=po_exact,
        p_out_approx=po_approx,
        s_min=s_min(pc_exact, confidence),
        hazard=po_exact > hazard_threshold,
    )
