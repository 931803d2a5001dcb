"""Single-number indicators per group: I3, top-10% share, summary statistics, h-index."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from ._stats import quantile
from .rank_classes import PR2, PR6, RankClassDistribution, distribution


@dataclass(frozen=True)
class ProportionCI:
    share: float
    lower: float
    upper: float
    level: float
    method: str
    clipped: bool = False

    def to_dict(self) -> dict:
        return {"share": self.share, "lower": self.lower, "upper": self.upper,
                "level": self.level, "method": self.method, "clipped": self.clipped}


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    sd: float
    min: float
    max: float
    median: float
    degenerate: bool = False  # sd undefined for n == 1, reported as 0

    def to_dict(self) -> dict:
        return {"n": self.n, "mean": self.mean, "sd": self.sd, "min": self.min,
                "max": self.max, "median": self.median, "degenerate": self.degenerate}


@dataclass(frozen=True)
class IndicatorReport:
    group: str
    n: int
    i3: float
    i3_max: float
    top10: ProportionCI
    summary: SummaryStats
    h_index: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def i3_pct_of_max(self) -> float:
        return self.i3 / self.i3_max

    @property
    def top10_share(self) -> float:
        return self.top10.share

    def to_dict(self) -> dict:
        return {
            "group": self.group, "n": self.n, "i3": self.i3, "i3_max": self.i3_max,
            "i3_pct_of_max": self.i3_pct_of_max, "top10": self.top10.to_dict(),
            "summary": self.summary.to_dict(), "h_index": self.h_index,
        }


def i3(dist: RankClassDistribution) -> float:
    """Integrated impact indicator: class weight times class count, summed.

    Weights run from 1 for the worst PR(6) class to 6 for the top 1%.
    """
    if dist.scheme.name != "PR6":
        raise ValueError(f"I3 is defined on PR6 distributions, got {dist.scheme.name}")
    return float(sum((i + 1) * f for i, f in enumerate(dist.counts)))


def i3_max(n: int) -> float:
    return float(len(PR6.classes) * n)


def i3_pct_of_max(i3_value: float, n: int) -> float:
    return i3_value / i3_max(n)


def wilson_interval(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    z = stats.norm.ppf(0.5 + level / 2)
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    # The bounds are exactly 0 at k = 0 and 1 at k = n; the subtraction above
    # leaves rounding residue there, so pin them and keep lower <= p <= upper.
    lo = 0.0 if k == 0 else min(p, float(centre - half))
    hi = 1.0 if k == n else max(p, float(centre + half))
    return max(0.0, lo), min(1.0, hi)


def wald_interval(k: int, n: int, level: float = 0.95) -> tuple[float, float, bool]:
    z = stats.norm.ppf(0.5 + level / 2)
    p = k / n
    half = z * math.sqrt(p * (1 - p) / n)
    lo, hi = p - half, p + half
    clipped = lo < 0 or hi > 1
    return max(0.0, float(lo)), min(1.0, float(hi)), bool(clipped)


def proportion_ci(k: int, n: int, level: float = 0.95, method: str = "wilson") -> ProportionCI:
    if n <= 0:
        raise ValueError("proportion of an empty group")
    if not 0 < level < 1:
        raise ValueError(f"ci level must lie in (0, 1), got {level}")
    if method == "wilson":
        lo, hi = wilson_interval(k, n, level)
        return ProportionCI(k / n, lo, hi, level, method)
    if method == "wald":
        lo, hi, clipped = wald_interval(k, n, level)
        return ProportionCI(k / n, lo, hi, level, method, clipped)
    raise ValueError(f"unknown CI method {method!r}")


def top10_share(dist: RankClassDistribution, ci_level: float = 0.95,
                ci_method: str = "wilson") -> ProportionCI:
    if dist.scheme.name != "PR2":
        raise ValueError(f"top-10% share needs a PR2 distribution, got {dist.scheme.name}")
    return proportion_ci(dist.count("10%"), dist.n, ci_level, ci_method)


def summary_stats(percentiles: Sequence[float]) -> SummaryStats:
    x = np.asarray(percentiles, dtype=float)
    if x.size == 0:
        raise ValueError("summary statistics of an empty group")
    degenerate = x.size == 1
    sd = 0.0 if degenerate else float(np.std(x, ddof=1))
    return SummaryStats(int(x.size), float(x.mean()), sd, float(x.min()), float(x.max()),
                        quantile(x, 0.5), degenerate)


def h_index(citations: Sequence[int]) -> int:
    ranked = sorted(citations, reverse=True)
    h = 0
    for i, c in enumerate(ranked, start=1):
        if c >= i:
            h = i
        else:
            break
    return h


def group_indicators(group: str, records, ci_level: float = 0.95,
                     ci_method: str = "wilson") -> IndicatorReport:
    """All indicators for one group's records (percentiles required)."""
    pr6 = distribution(records, PR6, group)
    pr2 = distribution(records, PR2, group)
    cites = [r.citations for r in records if r.citations is not None]
    h = h_index(cites) if len(cites) == len(records) and cites else None
    return IndicatorReport(
        group=group, n=pr6.n, i3=i3(pr6), i3_max=i3_max(pr6.n),
        top10=top10_share(pr2, ci_level, ci_method),
        summary=summary_stats([r.percentile for r in records]),
        h_index=h,
    )
