"""Independent reference computations used by the tests.

Nothing here imports the package's numerical code; each function works from
the textbook definition by brute force or plain arithmetic.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def percentile_ge_bruteforce(citations: int, refset: list[int]) -> float:
    n_ge = 0
    for c in refset:
        if c >= citations:
            n_ge += 1
    return 100.0 * n_ge / len(refset)


def midranks_bruteforce(values) -> list[float]:
    """rank = (#smaller) + (#equal + 1) / 2, by pairwise comparison."""
    out = []
    for v in values:
        less = sum(1 for w in values if w < v)
        equal = sum(1 for w in values if w == v)
        out.append(less + (equal + 1) / 2)
    return out


def kruskal_h_definition(groups) -> float:
    """H as the between-group share of the rank variance, (N-1) SS_between / SS_total.

    This form already carries the tie correction.
    """
    pooled = [v for g in groups for v in g]
    ranks = midranks_bruteforce(pooled)
    n = len(pooled)
    mean_rank = sum(ranks) / n
    ss_total = sum((r - mean_rank) ** 2 for r in ranks)
    ss_between = 0.0
    pos = 0
    for g in groups:
        rg = ranks[pos:pos + len(g)]
        pos += len(g)
        ss_between += len(g) * (sum(rg) / len(g) - mean_rank) ** 2
    return (n - 1) * ss_between / ss_total


def kruskal_permutation_distribution(groups):
    """Exact null distribution of H over all distinct assignments of the pooled
    values to groups of the observed sizes. Returns (observed H, list of H)."""
    pooled = [v for g in groups for v in g]
    sizes = [len(g) for g in groups]
    n = len(pooled)
    observed = kruskal_h_definition(groups)
    hs = []
    idx = list(range(n))

    def assign(remaining, sizes_left, acc):
        if not sizes_left:
            hs.append(kruskal_h_definition([[pooled[i] for i in part] for part in acc]))
            return
        for combo in itertools.combinations(remaining, sizes_left[0]):
            rest = [i for i in remaining if i not in combo]
            assign(rest, sizes_left[1:], acc + [combo])

    assign(idx, sizes, [])
    return observed, hs


def chi_square_cells(table):
    rows = len(table)
    cols = len(table[0])
    rt = [sum(r) for r in table]
    ct = [sum(table[i][j] for i in range(rows)) for j in range(cols)]
    n = sum(rt)
    cells = [[(table[i][j] - rt[i] * ct[j] / n) ** 2 / (rt[i] * ct[j] / n)
              for j in range(cols)] for i in range(rows)]
    return cells


def wilson_by_hand(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    p = k / n
    a = p + z * z / (2 * n)
    b = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    d = 1 + z * z / n
    return (a - b) / d, (a + b) / d


def h_index_bruteforce(citations) -> int:
    best = 0
    for h in range(len(citations) + 1):
        if sum(1 for c in citations if c >= h) >= h:
            best = h
    return best


def hc0_sandwich_times_factor(X, y, beta) -> np.ndarray:
    """Heteroskedasticity-robust sandwich for a logit fit, built row by row,
    scaled by n/(n-1) (singleton clusters)."""
    X = np.asarray(X, dtype=float)
    n, k = X.shape
    bread_inv = np.zeros((k, k))
    meat = np.zeros((k, k))
    for i in range(n):
        eta = sum(X[i, j] * beta[j] for j in range(k))
        p = 1.0 / (1.0 + math.exp(-eta))
        xi = X[i].reshape(-1, 1)
        bread_inv += p * (1 - p) * (xi @ xi.T)
        s = xi * (y[i] - p)
        meat += s @ s.T
    bread = np.linalg.inv(bread_inv)
    return n / (n - 1) * bread @ meat @ bread


def quantile_type7(values, q: float) -> float:
    x = sorted(values)
    h = (len(x) - 1) * q
    lo = int(math.floor(h))
    hi = min(lo + 1, len(x) - 1)
    return x[lo] + (h - lo) * (x[hi] - x[lo])
