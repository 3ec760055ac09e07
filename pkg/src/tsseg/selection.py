"""Statistical order selection.

Segmentations of increasing order are accepted while they remain
statistically significant and the first failure stops the search.  Two
verdicts are implemented:

* mean-based models: a Scheffe simultaneous-contrast test on every pair of
  adjacent segment means, against the pooled within-segment variance;
* regression models (ar, poly): a residual whiteness check based on the
  lag-1 autocorrelation of the pooled prediction errors.

Note that the contrast test is applied to a segmentation that was itself
chosen to maximize separation, so on structureless noise it rejects far
more often than its nominal level; order selection here is a pragmatic
stopping rule, not a calibrated hypothesis test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .core import Segmentation, TimeSeries, segment_stats, segmentation_cost
from .costs import build_cost_matrix, lag_matrix
from .dp import dp_segment
from .hmm import hmm_segment

__all__ = [
    "ScheffeResult",
    "WhitenessResult",
    "SelectionRecord",
    "SelectionReport",
    "scheffe_significant",
    "residual_whiteness",
    "select_order",
    "f_quantile",
]


# ---------------------------------------------------------------------------
# F-distribution quantiles via the regularized incomplete beta function
# (continued-fraction evaluation; no statistical tables).
# ---------------------------------------------------------------------------

def _betacf(a: float, b: float, x: float) -> float:
    # Lentz's method for the continued fraction of the incomplete beta.
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def _betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _f_cdf(v: float, d1: int, d2: int) -> float:
    if v <= 0.0:
        return 0.0
    return _betainc(d1 / 2.0, d2 / 2.0, d1 * v / (d1 * v + d2))


def f_quantile(q: float, d1: int, d2: int) -> float:
    """Quantile of the F distribution with (d1, d2) degrees of freedom."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly between 0 and 1")
    if d1 < 1 or d2 < 1:
        raise ValueError("degrees of freedom must be >= 1")
    lo, hi = 0.0, 1.0
    while _f_cdf(hi, d1, d2) < q:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("failed to bracket the F quantile")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _f_cdf(mid, d1, d2) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, lo):
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# significance tests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScheffeResult:
    significant: bool
    statistics: tuple[float, ...]  # one per adjacent segment pair
    threshold: float
    pooled_variance: float
    dof: tuple[int, int]
    degenerate: bool = False


def scheffe_significant(
    x: TimeSeries, t: Segmentation, alpha: float = 0.05
) -> ScheffeResult:
    """Simultaneous test that all adjacent segment means differ.

    Each adjacent contrast psi = mean_k - mean_{k+1} is scored as
    psi^2 / (s2w (1/T_k + 1/T_{k+1})) with s2w the pooled within-segment
    variance, and compared against (K-1) times the upper-alpha F quantile
    with (K-1, T-K) degrees of freedom.  All contrasts must exceed the
    threshold.  The verdict is scale-free.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    K = t.order
    if K < 2:
        raise ValueError("the contrast test needs at least two segments")
    T = len(x)
    stats = segment_stats(x, t)
    if T <= K:
        return ScheffeResult(
            significant=False,
            statistics=(float("nan"),) * (K - 1),
            threshold=float("nan"),
            pooled_variance=0.0,
            dof=(K - 1, T - K),
            degenerate=True,
        )
    s2w = sum(s.deviation for s in stats) / (T - K)
    threshold = (K - 1) * f_quantile(1.0 - alpha, K - 1, T - K)
    contrasts = []
    for a, b in zip(stats, stats[1:]):
        psi2 = (a.mean - b.mean) ** 2
        denom = s2w * (1.0 / a.length + 1.0 / b.length)
        if denom > 0.0:
            contrasts.append(psi2 / denom)
        else:
            contrasts.append(math.inf if psi2 > 0.0 else 0.0)
    degenerate = s2w == 0.0 and any(s.length == 1 for s in stats)
    significant = not degenerate and all(c > threshold for c in contrasts)
    return ScheffeResult(
        significant=significant,
        statistics=tuple(contrasts),
        threshold=threshold,
        pooled_variance=s2w,
        dof=(K - 1, T - K),
        degenerate=degenerate,
    )


@dataclass(frozen=True)
class WhitenessResult:
    white: bool
    lag1: float
    band: float
    n: int


def residual_whiteness(residuals, alpha: float = 0.05) -> WhitenessResult:
    """Lag-1 autocorrelation check: residuals are white when it falls
    inside +-z_{1-alpha/2}/sqrt(n).  Constant residuals count as white.
    """
    r = np.asarray(residuals, dtype=np.float64).reshape(-1)
    if r.size < 10:
        raise ValueError("whiteness check needs at least 10 residuals")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    band = NormalDist().inv_cdf(1.0 - alpha / 2.0) / math.sqrt(r.size)
    centered = r - r.mean()
    denom = float(centered @ centered)
    if denom == 0.0:
        return WhitenessResult(white=True, lag1=0.0, band=band, n=r.size)
    lag1 = float(centered[1:] @ centered[:-1]) / denom
    return WhitenessResult(white=abs(lag1) <= band, lag1=lag1, band=band, n=r.size)


# ---------------------------------------------------------------------------
# order selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SelectionRecord:
    order: int
    segmentation: Segmentation
    cost: float
    significant: bool
    statistic: float  # smallest contrast statistic, or lag-1 autocorrelation
    threshold: float
    collapsed: bool = False


@dataclass(frozen=True)
class SelectionReport:
    records: tuple[SelectionRecord, ...]
    chosen_order: int


def _segment_residuals(
    x: TimeSeries, t: Segmentation, cost_model: str, order: int, delta: float
) -> np.ndarray:
    """Pooled prediction errors of the per-segment model fits."""
    out = np.empty(len(x))
    if cost_model == "ar":
        U = lag_matrix(x.values, order)
        eye = np.eye(order + 1)
        for start, end in t.segments():
            rows = slice(start - 1, end)
            Uk = U[rows]
            coef = np.linalg.solve(
                Uk.T @ Uk + delta * eye, Uk.T @ x.values[rows]
            )
            out[rows] = x.values[rows] - Uk @ coef
    elif cost_model == "poly":
        for start, end in t.segments():
            rows = slice(start - 1, end)
            n = end - start + 1
            design = np.vander(np.arange(1.0, n + 1.0), order + 1, increasing=True)
            coef = np.linalg.solve(
                design.T @ design + delta * np.eye(order + 1),
                design.T @ x.values[rows],
            )
            out[rows] = x.values[rows] - design @ coef
    else:
        raise ValueError(f"no residual model for {cost_model!r}")
    return out


def select_order(
    x: TimeSeries,
    algorithm: str = "hmm",
    cost_model: str = "means",
    *,
    order: int = 1,
    p: float = 0.9,
    alpha: float = 0.05,
    k_max: int = 10,
    delta: float = 1e-6,
    epsilon: float = 1e-9,
    max_iter: int = 100,
    restarts: int = 0,
    seed: int | None = None,
    min_segment_length: int | None = None,
) -> SelectionReport:
    """Run the chosen segmenter for K = 2, 3, ... and stop at the first
    order whose segmentation fails the significance check.

    The chosen order is the last K for which every order 2..K passed; it is
    1 if the very first split already fails.  The report keeps one record
    per attempted order.  A run of the iterative segmenter that lost states
    (fewer than K segments) counts as a failure.
    """
    T = len(x)
    k_max = min(k_max, T)
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    if algorithm not in ("hmm", "dp"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if algorithm == "hmm" and cost_model == "poly":
        raise ValueError("the iterative segmenter does not support 'poly'")

    dp_results = None
    if algorithm == "dp":
        matrix = build_cost_matrix(x, cost_model, order=order, delta=delta)
        dp_results = dp_segment(matrix, k_max, min_segment_length)

    records: list[SelectionRecord] = []
    chosen = 1
    for K in range(2, k_max + 1):
        if dp_results is not None:
            res = dp_results[K - 1]
            seg, cost = res.segmentation, res.cost
        else:
            seg, trace = hmm_segment(
                x,
                K,
                p,
                model=cost_model,
                order=order,
                delta=delta,
                epsilon=epsilon,
                max_iter=max_iter,
                restarts=restarts,
                seed=seed,
            )
            cost = trace.final.cost
        collapsed = seg.order < K
        if cost_model == "means":
            if seg.order >= 2:
                verdict = scheffe_significant(x, seg, alpha)
                statistic = min(verdict.statistics)
                threshold = verdict.threshold
                ok = verdict.significant
            else:
                statistic, threshold, ok = float("nan"), float("nan"), False
        else:
            residuals = _segment_residuals(x, seg, cost_model, order, delta)
            verdict = residual_whiteness(residuals, alpha)
            statistic = verdict.lag1
            threshold = verdict.band
            ok = verdict.white
        significant = ok and not collapsed
        records.append(
            SelectionRecord(
                order=K,
                segmentation=seg,
                cost=cost,
                significant=significant,
                statistic=statistic,
                threshold=threshold,
                collapsed=collapsed,
            )
        )
        if not significant:
            break
        chosen = K
    return SelectionReport(records=tuple(records), chosen_order=chosen)
