"""Small numeric helpers shared by the indicator, inference and plotting code."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy import special


def quantile(values: Sequence[float], q: float) -> float:
    """Quantile by linear interpolation between order statistics (type 7)."""
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        raise ValueError("quantile of an empty sample")
    if not 0 <= q <= 1:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    h = (x.size - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, x.size - 1)
    return float(x[lo] + (h - lo) * (x[hi] - x[lo]))


def chi2_sf(statistic: float, df: int) -> float:
    """Upper tail of the chi-square distribution."""
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    if statistic <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, statistic / 2.0))


def norm_sf2(z: float) -> float:
    """Two-sided normal p-value for a Wald/z statistic."""
    return float(special.erfc(abs(z) / math.sqrt(2.0)))


def bonferroni(p_values: Sequence[float], m: int | None = None) -> list[float]:
    m = len(p_values) if m is None else m
    return [min(1.0, m * p) for p in p_values]
