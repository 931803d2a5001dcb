"""Significance tests: normality pre-test, Kruskal-Wallis H, Bonferroni pairwise
rank-sum tests and the chi-square test of independence with cell contributions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from ._stats import bonferroni, chi2_sf, norm_sf2

DEFAULT_ALPHA = 0.001


class InferenceError(ValueError):
    pass


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    test_name: str
    statistic: float
    df: int | tuple[int, int] | None
    p_value: float
    alpha: float = DEFAULT_ALPHA
    payload: dict = field(default_factory=dict)
    degenerate: bool = False

    @property
    def significant(self) -> bool:
        return self.p_value < self.alpha

    def to_dict(self) -> dict:
        payload = {k: (v.to_dict() if hasattr(v, "to_dict") else v) for k, v in self.payload.items()}
        return {
            "test_name": self.test_name, "statistic": self.statistic,
            "df": list(self.df) if isinstance(self.df, tuple) else self.df,
            "p_value": self.p_value, "alpha": self.alpha, "significant": self.significant,
            "degenerate": self.degenerate, "payload": payload,
        }


def _named_groups(groups) -> tuple[list[str], list[np.ndarray]]:
    if isinstance(groups, Mapping):
        labels = list(groups)
        samples = [np.asarray(groups[k], dtype=float) for k in labels]
    else:
        samples = [np.asarray(g, dtype=float) for g in groups]
        labels = [str(i + 1) for i in range(len(samples))]
    return labels, samples


# -- normality ---------------------------------------------------------------

def skewness(x) -> float:
    x = np.asarray(x, dtype=float)
    d = x - x.mean()
    m2 = np.mean(d ** 2)
    if m2 == 0:
        return 0.0
    return float(np.mean(d ** 3) / m2 ** 1.5)


def kurtosis(x) -> float:
    """Non-excess (Pearson) kurtosis b2."""
    x = np.asarray(x, dtype=float)
    d = x - x.mean()
    m2 = np.mean(d ** 2)
    if m2 == 0:
        return 3.0
    return float(np.mean(d ** 4) / m2 ** 2)


def skewness_z(x) -> float:
    """D'Agostino's normal transform of sample skewness."""
    n = len(x)
    b1 = skewness(x)
    y = b1 * math.sqrt((n + 1) * (n + 3) / (6.0 * (n - 2)))
    beta2 = (3.0 * (n * n + 27 * n - 70) * (n + 1) * (n + 3)
             / ((n - 2.0) * (n + 5) * (n + 7) * (n + 9)))
    w2 = -1 + math.sqrt(2 * (beta2 - 1))
    delta = 1 / math.sqrt(0.5 * math.log(w2))
    alpha = math.sqrt(2.0 / (w2 - 1))
    y = y / alpha
    return delta * math.log(y + math.sqrt(y * y + 1))


def kurtosis_z(x) -> float:
    """Anscombe-Glynn normal transform of sample kurtosis."""
    n = len(x)
    b2 = kurtosis(x)
    mean = 3.0 * (n - 1) / (n + 1)
    var = 24.0 * n * (n - 2) * (n - 3) / ((n + 1) ** 2 * (n + 3) * (n + 5))
    xs = (b2 - mean) / math.sqrt(var)
    sqrt_beta1 = (6.0 * (n * n - 5 * n + 2) / ((n + 7) * (n + 9))
                  * math.sqrt(6.0 * (n + 3) * (n + 5) / (n * (n - 2) * (n - 3))))
    a = 6 + 8 / sqrt_beta1 * (2 / sqrt_beta1 + math.sqrt(1 + 4 / sqrt_beta1 ** 2))
    term1 = 1 - 2 / (9 * a)
    denom = 1 + xs * math.sqrt(2 / (a - 4))
    term2 = np.sign(denom) * np.cbrt((1 - 2 / a) / abs(denom)) if denom != 0 else np.nan
    return float((term1 - term2) / math.sqrt(2 / (9 * a)))


def normality_test(sample: Sequence[float], alpha: float = DEFAULT_ALPHA) -> TestResult:
    """D'Agostino-Pearson omnibus K^2 test from skewness and kurtosis."""
    x = np.asarray(sample, dtype=float)
    n = x.size
    if n < 8:
        raise InferenceError(f"normality test needs n >= 8, got n = {n}")
    if np.all(x == x[0]):
        return TestResult("normality", 0.0, 2, 1.0, alpha,
                          {"n": n, "z_skew": 0.0, "z_kurt": 0.0,
                           "skewness": 0.0, "kurtosis": 3.0}, degenerate=True)
    z1 = skewness_z(x)
    z2 = kurtosis_z(x)
    k2 = z1 * z1 + z2 * z2
    return TestResult("normality", k2, 2, chi2_sf(k2, 2), alpha,
                      {"n": int(n), "z_skew": z1, "z_kurt": z2,
                       "skewness": skewness(x), "kurtosis": kurtosis(x)})


# -- Kruskal-Wallis ------------------------------------------------------------

def tie_sum(values) -> float:
    """Sum of t^3 - t over tie groups."""
    _, t = np.unique(np.asarray(values), return_counts=True)
    t = t.astype(float)
    return float(np.sum(t ** 3 - t))


def kruskal_wallis(groups, alpha: float = DEFAULT_ALPHA) -> TestResult:
    """H-test with midranks and tie correction; chi-square(k-1) p-value."""
    labels, samples = _named_groups(groups)
    k = len(samples)
    if k < 2:
        raise InferenceError("Kruskal-Wallis needs at least two groups")
    for lab, s in zip(labels, samples):
        if s.size == 0:
            raise InferenceError(f"group {lab!r} is empty")
    pooled = np.concatenate(samples)
    n = pooled.size
    if n < 3:
        raise InferenceError(f"Kruskal-Wallis needs n >= 3, got {n}")
    ranks = rankdata(pooled)
    bounds = np.cumsum([0] + [s.size for s in samples])
    rank_sums = [float(ranks[a:b].sum()) for a, b in zip(bounds, bounds[1:])]
    mean_ranks = {lab: rs / s.size for lab, rs, s in zip(labels, rank_sums, samples)}
    payload = {"groups": labels, "n": [int(s.size) for s in samples],
               "rank_sums": rank_sums, "mean_ranks": mean_ranks}
    correction = 1 - tie_sum(pooled) / (n ** 3 - n)
    if correction <= 0:
        payload["tie_correction"] = 0.0
        return TestResult("kruskal_wallis", 0.0, k - 1, 1.0, alpha, payload, degenerate=True)
    h_raw = 12.0 / (n * (n + 1)) * sum(rs * rs / s.size for rs, s in zip(rank_sums, samples)) \
        - 3.0 * (n + 1)
    h = max(h_raw / correction, 0.0)
    payload["tie_correction"] = correction
    payload["h_uncorrected"] = h_raw
    return TestResult("kruskal_wallis", h, k - 1, chi2_sf(h, k - 1), alpha, payload)


# -- pairwise rank-sum tests ----------------------------------------------------

def rank_sum_test(a, b) -> dict:
    """Two-sample Wilcoxon rank-sum (Mann-Whitney) test, normal approximation,
    tie-corrected variance, no continuity correction."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n1, n2 = a.size, b.size
    if n1 == 0 or n2 == 0:
        raise InferenceError("rank-sum test with an empty group")
    pooled = np.concatenate([a, b])
    n = n1 + n2
    ranks = rankdata(pooled)
    r1 = float(ranks[:n1].sum())
    u = r1 - n1 * (n1 + 1) / 2.0
    mu = n1 * n2 / 2.0
    ties = tie_sum(pooled)
    var = n1 * n2 / 12.0 * ((n + 1) - (ties / (n * (n - 1)) if n > 1 else 0.0))
    if var <= 0:
        return {"u": u, "z": 0.0, "p": 1.0, "rank_sum": r1, "degenerate": True}
    z = (u - mu) / math.sqrt(var)
    return {"u": u, "z": z, "p": norm_sf2(z), "rank_sum": r1, "degenerate": False}


@dataclass(frozen=True)
class PairwiseComparison:
    group_a: str
    group_b: str
    statistic: float
    raw_p: float
    adjusted_p: float
    significant: bool
    u: float = float("nan")

    def to_dict(self) -> dict:
        return {"group_a": self.group_a, "group_b": self.group_b, "statistic": self.statistic,
                "u": self.u, "raw_p": self.raw_p, "adjusted_p": self.adjusted_p,
                "significant": self.significant}


@dataclass(frozen=True)
class PairwiseTable:
    comparisons: tuple[PairwiseComparison, ...]
    m: int
    alpha: float = DEFAULT_ALPHA
    adjustment: str = "bonferroni"

    def lookup(self, a: str, b: str) -> PairwiseComparison:
        for c in self.comparisons:
            if {c.group_a, c.group_b} == {a, b}:
                return c
        raise KeyError((a, b))

    def significant_partners(self, group: str) -> list[str]:
        out = []
        for c in self.comparisons:
            if c.significant and group in (c.group_a, c.group_b):
                out.append(c.group_b if c.group_a == group else c.group_a)
        return sorted(out)

    def to_dict(self) -> dict:
        return {"m": self.m, "alpha": self.alpha, "adjustment": self.adjustment,
                "comparisons": [c.to_dict() for c in self.comparisons]}


def pairwise_rank_tests(groups, alpha: float = DEFAULT_ALPHA,
                        adjustment: str = "bonferroni") -> PairwiseTable:
    """All k(k-1)/2 rank-sum tests with Bonferroni-adjusted p-values.

    The z statistic is oriented as group_a minus group_b, where group_a is
    the later label of the pair.
    """
    if adjustment != "bonferroni":
        raise InferenceError(f"unsupported adjustment {adjustment!r}")
    labels, samples = _named_groups(groups)
    if len(samples) < 2:
        raise InferenceError("pairwise tests need at least two groups")
    for lab, s in zip(labels, samples):
        if s.size == 0:
            raise InferenceError(f"group {lab!r} is empty")
    pairs = list(itertools.combinations(range(len(labels)), 2))
    raw = [rank_sum_test(samples[j], samples[i]) for i, j in pairs]
    adjusted = bonferroni([r["p"] for r in raw])
    comps = tuple(
        PairwiseComparison(labels[j], labels[i], r["z"], r["p"], adj, adj < alpha, r["u"])
        for (i, j), r, adj in zip(pairs, raw, adjusted)
    )
    return PairwiseTable(comps, len(pairs), alpha, adjustment)


# -- chi-square test of independence -------------------------------------------

@dataclass(frozen=True)
class ChiSquareDecomposition:
    observed: np.ndarray
    expected: np.ndarray
    contributions: np.ndarray
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    @property
    def row_totals(self) -> np.ndarray:
        return self.contributions.sum(axis=1)

    @property
    def col_totals(self) -> np.ndarray:
        return self.contributions.sum(axis=0)

    def cell(self, row: str, col: str) -> float:
        return float(self.contributions[self.row_labels.index(row), self.col_labels.index(col)])

    def to_dict(self) -> dict:
        return {
            "row_labels": list(self.row_labels), "col_labels": list(self.col_labels),
            "observed": self.observed.tolist(), "expected": self.expected.tolist(),
            "contributions": self.contributions.tolist(),
            "row_totals": self.row_totals.tolist(), "col_totals": self.col_totals.tolist(),
        }


def chi_square_independence(observed, alpha: float = DEFAULT_ALPHA,
                            row_labels: Sequence[str] = (),
                            col_labels: Sequence[str] = ()) -> TestResult:
    """Pearson chi-square on a contingency table, decomposed into per-cell
    contributions (O - E)^2 / E with E from the row and column totals."""
    obs = np.asarray(observed, dtype=float)
    if obs.ndim != 2 or obs.shape[0] < 2 or obs.shape[1] < 2:
        raise InferenceError(f"need at least a 2x2 table, got shape {obs.shape}")
    if np.any(obs < 0):
        raise InferenceError("observed counts must be non-negative")
    rows = tuple(row_labels) or tuple(str(i) for i in range(obs.shape[0]))
    cols = tuple(col_labels) or tuple(str(j) for j in range(obs.shape[1]))
    rsum = obs.sum(axis=1)
    csum = obs.sum(axis=0)
    for lab, t in zip(rows, rsum):
        if t <= 0:
            raise InferenceError(f"row {lab!r} has a zero total")
    for lab, t in zip(cols, csum):
        if t <= 0:
            raise InferenceError(f"column {lab!r} has a zero total")
    expected = np.outer(rsum, csum) / obs.sum()
    contrib = (obs - expected) ** 2 / expected
    stat = float(contrib.sum())
    df = (obs.shape[0] - 1) * (obs.shape[1] - 1)
    decomp = ChiSquareDecomposition(obs, expected, contrib, rows, cols)
    return TestResult("chi_square_independence", stat, df, chi2_sf(stat, df), alpha,
                      {"decomposition": decomp})
