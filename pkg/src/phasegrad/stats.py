"""Statistical tests and multi-seed summaries.

Self-contained implementations of Welch's t-test and Fisher's exact
test. The t-distribution tail is evaluated through the regularized
incomplete beta function (continued fraction), and the Fisher p-value
by exact hypergeometric enumeration in log space, so both are accurate
at the experiment sizes used here (up to a few hundred seeds).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConvergenceSummary:
    """Multi-seed training outcome statistics.

    Accuracy statistics are over test accuracy; convergence is judged
    on final-epoch training accuracy. converged_mean_acc and
    converged_std are None when no seed converged.
    """

    n_seeds: int
    n_converged: int
    converged_mean_acc: float | None
    converged_std: float | None
    all_seed_mean_acc: float
    threshold: float

    def __post_init__(self) -> None:
        if self.n_converged > self.n_seeds:
            raise ValueError("n_converged exceeds n_seeds")


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Lentz's algorithm for the incomplete beta continued fraction."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
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


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_sf_two_sided(t: float, dof: float) -> float:
    """Two-sided tail probability of Student's t distribution."""
    if dof <= 0:
        raise ValueError("degrees of freedom must be positive")
    if t == 0.0:
        return 1.0
    x = dof / (dof + t * t)
    return regularized_incomplete_beta(dof / 2.0, 0.5, x)


def welch_t_test(a, b) -> tuple[float, float]:
    """Unequal-variance t-test; returns (t, two-sided p)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least 2 observations")
    va = a.var(ddof=1)
    vb = b.var(ddof=1)
    if va == 0.0 and vb == 0.0:
        raise ValueError("both samples have zero variance")
    sa, sb = va / a.size, vb / b.size
    t = (a.mean() - b.mean()) / math.sqrt(sa + sb)
    dof = (sa + sb) ** 2 / (sa**2 / (a.size - 1) + sb**2 / (b.size - 1))
    return float(t), student_t_sf_two_sided(float(t), dof)


def _log_hypergeom(k: int, r1: int, r2: int, c1: int) -> float:
    """Log probability of top-left cell k given fixed margins."""
    return (
        math.lgamma(r1 + 1)
        - math.lgamma(k + 1)
        - math.lgamma(r1 - k + 1)
        + math.lgamma(r2 + 1)
        - math.lgamma(c1 - k + 1)
        - math.lgamma(r2 - c1 + k + 1)
        + math.lgamma(c1 + 1)
        + math.lgamma(r1 + r2 - c1 + 1)
        - math.lgamma(r1 + r2 + 1)
    )


def fisher_exact_2x2(table) -> float:
    """Two-sided Fisher exact test on a 2x2 count table.

    Sums the probabilities of all tables (with the observed margins)
    that are no more likely than the observed one. The slight tolerance
    factor guards against ties being missed to roundoff.
    """
    arr = np.asarray(table, dtype=np.int64)
    if arr.shape != (2, 2) or np.any(arr < 0):
        raise ValueError("expected a 2x2 table of nonnegative counts")
    a, b = int(arr[0, 0]), int(arr[0, 1])
    c, d = int(arr[1, 0]), int(arr[1, 1])
    r1, r2, c1 = a + b, c + d, a + c

    lo = max(0, c1 - r2)
    hi = min(r1, c1)
    log_obs = _log_hypergeom(a, r1, r2, c1)
    cutoff = log_obs + math.log1p(1e-7)
    total = 0.0
    for k in range(lo, hi + 1):
        log_pk = _log_hypergeom(k, r1, r2, c1)
        if log_pk <= cutoff:
            total += math.exp(log_pk)
    return min(total, 1.0)


def summarize(traces, threshold: float = 0.6) -> ConvergenceSummary:
    """Convergence-rate and accuracy summary over training traces.

    Each trace must expose final_train_accuracy and test_accuracy.
    Convergence means final-epoch training accuracy above the
    threshold; mean and spread are then reported over the converged
    subset's test accuracy, alongside the unconditional mean.
    """
    traces = list(traces)
    if not traces:
        raise ValueError("no traces to summarize")
    test_accs = np.array([t.test_accuracy for t in traces])
    converged = np.array([t.final_train_accuracy > threshold for t in traces])
    n_conv = int(converged.sum())
    if n_conv:
        conv_mean = float(test_accs[converged].mean())
        conv_std = float(test_accs[converged].std())
    else:
        conv_mean = None
        conv_std = None
    return ConvergenceSummary(
        n_seeds=len(traces),
        n_converged=n_conv,
        converged_mean_acc=conv_mean,
        converged_std=conv_std,
        all_seed_mean_acc=float(test_accs.mean()),
        threshold=threshold,
    )
