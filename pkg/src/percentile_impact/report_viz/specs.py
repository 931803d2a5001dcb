"""Machine-readable chart specifications for the five standard figures.

Every builder here is a pure function of its inputs, so the JSON emitted for
a given data set never changes between runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .._stats import quantile
from ..corpus import Corpus
from ..indicators import IndicatorReport
from ..inference import ChiSquareDecomposition, PairwiseTable
from ..rank_classes import PR6, RankClassDistribution
from ..regression import MarginsResult

LOWER, UPPER = 0.0, 100.0
MAX_GRID_POINTS = 10001  # spacing 0.01, the precision percentiles are reported at


class SpecError(ValueError):
    pass


# -- violin --------------------------------------------------------------------

def silverman_bandwidth(x) -> float:
    x = np.asarray(x, dtype=float)
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    iqr = quantile(x, 0.75) - quantile(x, 0.25)
    spread = min(sd, iqr / 1.34)
    if spread <= 0:
        spread = sd if sd > 0 else iqr / 1.34
    return 0.9 * spread * x.size ** -0.2


def reflected_kde(x, grid, h: float) -> np.ndarray:
    """Gaussian KDE with reflection at both ends of [0, 100]."""
    x = np.asarray(x, dtype=float)
    grid = np.asarray(grid, dtype=float)
    centres = np.concatenate([x, 2 * LOWER - x, 2 * UPPER - x])
    u = (grid[:, None] - centres[None, :]) / h
    dens = np.exp(-0.5 * u * u).sum(axis=1) / (x.size * h * math.sqrt(2 * math.pi))
    return dens


def adjacent_values(x) -> tuple[float, float]:
    """Most extreme observations within 1.5 IQR of the quartiles."""
    x = np.asarray(x, dtype=float)
    q1, q3 = quantile(x, 0.25), quantile(x, 0.75)
    iqr = q3 - q1
    inside = x[(x >= q1 - 1.5 * iqr) & (x <= q3 + 1.5 * iqr)]
    return float(inside.min()), float(inside.max())


@dataclass(frozen=True)
class ViolinGroup:
    group: str
    n: int
    median: float
    q1: float
    q3: float
    lower_adjacent: float
    upper_adjacent: float
    bandwidth: float | None
    grid: tuple[float, ...] = ()
    density: tuple[float, ...] = ()
    point_mass: float | None = None

    @property
    def integral(self) -> float:
        if not self.grid:
            return float("nan")
        g = np.asarray(self.grid)
        d = np.asarray(self.density)
        return float(np.sum((d[1:] + d[:-1]) * np.diff(g)) / 2)

    def to_dict(self) -> dict:
        return {"group": self.group, "n": self.n, "median": self.median, "q1": self.q1,
                "q3": self.q3, "lower_adjacent": self.lower_adjacent,
                "upper_adjacent": self.upper_adjacent, "bandwidth": self.bandwidth,
                "grid": list(self.grid), "density": list(self.density),
                "point_mass": self.point_mass}


@dataclass(frozen=True)
class ViolinSpec:
    groups: tuple[ViolinGroup, ...]
    title: str = "Percentile distributions"
    y_label: str = "Percentile"

    def to_dict(self) -> dict:
        return {"type": "violin", "title": self.title, "y_label": self.y_label,
                "violin": [g.to_dict() for g in self.groups], "reference_lines": []}


def violin(percentiles: dict[str, Sequence[float]], bandwidth_rule="silverman",
           grid_points: int = 101) -> ViolinSpec:
    """Median, quartiles, adjacent values and a reflected KDE per group.

    ``bandwidth_rule`` is "silverman" or a fixed positive bandwidth. A group
    whose bandwidth is narrower than the grid spacing gets a finer grid (up to
    MAX_GRID_POINTS), since a coarser one cannot resolve the kernels.
    """
    if grid_points < 2:
        raise SpecError("grid_points must be >= 2")
    out = []
    for group in sorted(percentiles):
        x = np.asarray(percentiles[group], dtype=float)
        if x.size == 0:
            raise SpecError(f"group {group!r} is empty")
        lo_adj, hi_adj = adjacent_values(x)
        common = dict(group=group, n=int(x.size), median=quantile(x, 0.5),
                      q1=quantile(x, 0.25), q3=quantile(x, 0.75),
                      lower_adjacent=lo_adj, upper_adjacent=hi_adj)
        if np.unique(x).size < 2:
            out.append(ViolinGroup(bandwidth=None, point_mass=float(x[0]), **common))
            continue
        if bandwidth_rule == "silverman":
            h = silverman_bandwidth(x)
        else:
            h = float(bandwidth_rule)
            if h <= 0:
                raise SpecError("bandwidth must be positive")
        needed = math.ceil((UPPER - LOWER) / h) + 1
        grid = np.linspace(LOWER, UPPER, max(grid_points, min(needed, MAX_GRID_POINTS)))
        dens = reflected_kde(x, grid, h)
        out.append(ViolinGroup(bandwidth=h, grid=tuple(float(g) for g in grid),
                               density=tuple(float(d) for d in dens), **common))
    return ViolinSpec(tuple(out))


# -- box plots by year -----------------------------------------------------------

@dataclass(frozen=True)
class Box:
    group: str
    year: int
    n: int
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float

    def to_dict(self) -> dict:
        return {"group": self.group, "year": self.year, "n": self.n, "median": self.median,
                "q1": self.q1, "q3": self.q3, "whisker_low": self.whisker_low,
                "whisker_high": self.whisker_high}


@dataclass(frozen=True)
class BoxPlotSpec:
    boxes: tuple[Box, ...]
    labels: tuple[dict, ...]
    reference: float = 50.0
    notices: tuple[str, ...] = ()
    title: str = "Percentile distributions by publication year"

    def to_dict(self) -> dict:
        return {"type": "boxplot", "title": self.title, "y_label": "Percentile",
                "boxplot": [b.to_dict() for b in self.boxes], "labels": list(self.labels),
                "reference_lines": [{"value": self.reference, "style": "solid",
                                     "label": "average impact"}],
                "notices": list(self.notices)}


def box(values, group: str = "", year: int = 0) -> Box:
    x = np.asarray(values, dtype=float)
    lo, hi = adjacent_values(x)
    return Box(group, year, int(x.size), quantile(x, 0.5), quantile(x, 0.25),
               quantile(x, 0.75), lo, hi)


def boxplots_by_year(corpus: Corpus, groups: Sequence[str] | None = None,
                     years: Sequence[int] | None = None,
                     pairwise: PairwiseTable | None = None) -> BoxPlotSpec:
    """One box per group and year; group labels carry the all-years median and
    the groups it differs from significantly."""
    groups = list(groups) if groups is not None else corpus.groups
    years = list(years) if years is not None else corpus.years
    boxes, labels, notices = [], [], []
    index = corpus.group_index
    for g in groups:
        recs = index.get(g, ())
        pcts = [r.percentile for r in recs if r.percentile is not None]
        if len(pcts) != len(recs):
            raise SpecError(f"group {g!r} has records without percentiles")
        for y in years:
            vals = [r.percentile for r in recs if r.year == y]
            if not vals:
                notices.append(f"{g}: no records in {y}, box omitted")
                continue
            boxes.append(box(vals, g, y))
        labels.append({
            "group": g,
            "median_all_years": quantile(pcts, 0.5) if pcts else None,
            "differs_from": pairwise.significant_partners(g) if pairwise else [],
        })
    return BoxPlotSpec(tuple(boxes), tuple(labels), notices=tuple(notices))


# -- bar charts ------------------------------------------------------------------

@dataclass(frozen=True)
class Bar:
    category: str
    series: str
    value: float
    label: str = ""

    def to_dict(self) -> dict:
        return {"category": self.category, "series": self.series, "value": self.value,
                "label": self.label}


@dataclass(frozen=True)
class BarChartSpec:
    categories: tuple[str, ...]
    series: tuple[str, ...]
    bars: tuple[Bar, ...]
    annotations: tuple[dict, ...] = ()
    error_bars: tuple[dict, ...] = ()
    reference_lines: tuple[dict, ...] = ()
    title: str = ""
    y_label: str = ""
    kind: str = "bars"

    def bar(self, category: str, series: str) -> Bar:
        for b in self.bars:
            if b.category == category and b.series == series:
                return b
        raise KeyError((category, series))

    def to_dict(self) -> dict:
        return {"type": "bars", "kind": self.kind, "title": self.title, "y_label": self.y_label,
                "categories": list(self.categories), "series": list(self.series),
                "bars": [b.to_dict() for b in self.bars],
                "annotations": list(self.annotations), "error_bars": list(self.error_bars),
                "reference_lines": list(self.reference_lines)}


def _fmt_pct(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".") if v != int(v) else f"{int(v)}"


def pr6_category_label(cls) -> str:
    return f"{cls.label} (exp {_fmt_pct(cls.expected_share * 100)})"


def pr6_bar_chart(distributions: Sequence[RankClassDistribution],
                  decomposition: ChiSquareDecomposition | None = None) -> BarChartSpec:
    """Share of each group's papers per PR(6) class, annotated with the chi-square
    contribution of the corresponding cell."""
    dists = sorted(distributions, key=lambda d: d.group)
    for d in dists:
        if d.scheme.name != "PR6":
            raise SpecError("pr6_bar_chart needs PR6 distributions")
    groups = tuple(d.group for d in dists)
    if decomposition is not None:
        if (tuple(decomposition.row_labels) != groups
                or tuple(decomposition.col_labels) != PR6.labels):
            raise SpecError("distributions and chi-square decomposition use different grids")
    categories = tuple(pr6_category_label(c) for c in PR6.classes)
    bars, notes = [], []
    for cat, cls in zip(categories, PR6.classes):
        for d in dists:
            share = d.share(cls.label) * 100
            bars.append(Bar(cat, d.group, share, f"{share:.2f}"))
            if decomposition is not None:
                contrib = decomposition.cell(d.group, cls.label)
                notes.append({"category": cat, "series": d.group, "value": contrib,
                              "text": f"{contrib:.1f}"})
    return BarChartSpec(categories, groups, tuple(bars), tuple(notes),
                        title="Shares per PR(6) class", y_label="Percent of publications",
                        kind="pr6")


def top10_bar_chart(reports: Sequence[IndicatorReport]) -> BarChartSpec:
    """Top-10% counts per group with CI error bars (count scale) and the
    expected (10%) and pooled shares as per-group reference segments."""
    reps = sorted(reports, key=lambda r: r.group)
    total_n = sum(r.n for r in reps)
    total_k = sum(round(r.top10.share * r.n) for r in reps)
    pooled = total_k / total_n if total_n else 0.0
    bars, errs, refs = [], [], []
    for r in reps:
        k = round(r.top10.share * r.n)
        label = f"{r.top10.share * 100:.0f}%"
        bars.append(Bar(r.group, "top10", float(k), label))
        errs.append({"category": r.group, "series": "top10",
                     "lower": r.top10.lower * r.n, "upper": r.top10.upper * r.n,
                     "lower_share": r.top10.lower, "upper_share": r.top10.upper,
                     "level": r.top10.level, "method": r.top10.method})
        refs.append({"category": r.group, "value": 0.10 * r.n, "share": 0.10,
                     "style": "solid", "label": "expected 10%"})
        refs.append({"category": r.group, "value": pooled * r.n, "share": pooled,
                     "style": "dashed", "label": "all groups"})
    cats = tuple(r.group for r in reps)
    return BarChartSpec(cats, ("top10",), tuple(bars), (), tuple(errs), tuple(refs),
                        title="Publications in the top 10%", y_label="Number of publications",
                        kind="top10")


def margins_chart(margins: MarginsResult) -> BarChartSpec:
    preds = sorted(margins.predictions, key=lambda p: p.group)
    bars = tuple(Bar(p.group, "margin", p.margin, f"{p.margin * 100:.1f}%") for p in preds)
    errs = tuple({"category": p.group, "series": "margin", "lower": p.lower, "upper": p.upper,
                  "se": p.se, "level": p.level} for p in preds)
    return BarChartSpec(tuple(p.group for p in preds), ("margin",), bars, (), errs, (),
                        title="Adjusted predictions of top-10% membership",
                        y_label="Pr(top 10%)", kind="margins")
