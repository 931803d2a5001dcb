"""End-to-end analysis: percentiles, classes, indicators, tests, regression, figures."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import Corpus, regression_subset, subset_counts, summary_table
from .indicators import group_indicators, summary_stats
from .inference import (
    InferenceError,
    chi_square_independence,
    kruskal_wallis,
    normality_test,
    pairwise_rank_tests,
)
from .percentiles import assign_corpus_percentiles
from .rank_classes import PR2, PR6, distribution
from .regression import RegressionError, build_design, design_summary, fit_clustered, margins
from .report_viz import (
    boxplots_by_year,
    margins_chart,
    pr6_bar_chart,
    render_svg,
    top10_bar_chart,
    violin,
)
from .report_viz.specs import BarChartSpec

logger = logging.getLogger(__name__)

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5")
FIGURE_SIZES = {"fig2": (900, 440), "fig3": (960, 440)}


@dataclass
class RunConfig:
    input: str | None = None
    fmt: str = "csv"
    scheme: str = "incites_ge"
    ci_method: str = "wilson"
    ci_level: float = 0.95
    alpha: float = 0.001
    ref_group: str | None = None
    out_dir: str = "."
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0 < self.ci_level < 1:
            raise ValueError(f"ci level must lie in (0, 1), got {self.ci_level}")

    def describe(self) -> dict:
        d = asdict(self)
        d.pop("out_dir")
        d.pop("extra")
        return d


@dataclass
class ReportResult:
    report: dict
    svgs: dict[str, str]
    statistical_errors: list[str]


def jsonable(obj):
    """Plain JSON types; NaN and infinities become null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    return obj


def dumps(report: dict) -> str:
    return json.dumps(jsonable(report), indent=2, allow_nan=False) + "\n"


def prepare(corpus: Corpus, config: RunConfig) -> tuple[Corpus, list]:
    return assign_corpus_percentiles(corpus, config.scheme)


def corpus_section(corpus: Corpus, assignments) -> dict:
    return {
        "corpus": {
            "n_records": len(corpus), "n_unique": corpus.n_unique,
            "groups": corpus.groups, "years": corpus.years,
            "summary_table": summary_table(corpus).to_dict(),
            "duplicates": len(corpus.duplicate_map),
            "diagnostics": [str(d) for d in corpus.diagnostics],
        },
        "percentiles": {
            "assigned": len(assignments),
            "preassigned": len(corpus) - len(assignments),
        },
    }


def class_distributions(corpus: Corpus) -> dict[str, list]:
    index = corpus.group_index
    return {"PR6": [distribution(index[g], PR6, g) for g in index],
            "PR2": [distribution(index[g], PR2, g) for g in index]}


def indicator_section(corpus: Corpus, config: RunConfig) -> tuple[dict, list]:
    index = corpus.group_index
    indicators = [group_indicators(g, recs, config.ci_level, config.ci_method)
                  for g, recs in index.items()]
    all_pcts = [r.percentile for r in corpus.records]
    return {
        "groups": [i.to_dict() for i in indicators],
        "total": summary_stats(all_pcts).to_dict() if all_pcts else None,
    }, indicators


def tests_section(corpus: Corpus, config: RunConfig, errors: list[str],
                 pr6=None) -> tuple[dict, object, object]:
    """Normality, Kruskal-Wallis, pairwise and chi-square results.

    Returns the JSON section plus the pairwise table and chi-square result
    (None when not applicable or failed).
    """
    groups = corpus.groups
    index = corpus.group_index
    samples = {g: [r.percentile for r in index[g]] for g in groups}
    all_pcts = [r.percentile for r in corpus.records]
    tests: dict = {"normality": {}}
    for label, values in [*samples.items(), ("all", all_pcts)]:
        try:
            tests["normality"][label] = normality_test(values, config.alpha).to_dict()
        except InferenceError as exc:
            tests["normality"][label] = {"error": str(exc)}
    if len(groups) < 2:
        tests["kruskal_wallis"] = tests["pairwise"] = tests["chi_square"] = None
        tests["not_applicable"] = "fewer than two groups"
        return tests, None, None
    kw = _try(lambda: kruskal_wallis(samples, config.alpha), errors, "kruskal_wallis")
    pairwise = _try(lambda: pairwise_rank_tests(samples, config.alpha), errors, "pairwise")
    pr6 = pr6 if pr6 is not None else class_distributions(corpus)["PR6"]
    chi = _try(lambda: chi_square_independence([d.counts for d in pr6], config.alpha,
                                               groups, PR6.labels), errors, "chi_square")
    for key, res in (("kruskal_wallis", kw), ("pairwise", pairwise), ("chi_square", chi)):
        tests[key] = res.to_dict() if res is not None else {"error": _last(errors, key)}
    return tests, pairwise, chi


def figure_specs(corpus: Corpus, dists, indicators, pairwise, chi, margins_res) -> dict:
    samples = {g: [r.percentile for r in recs] for g, recs in corpus.group_index.items()}
    return {
        "fig1": violin(samples),
        "fig2": boxplots_by_year(corpus, pairwise=pairwise),
        "fig3": pr6_bar_chart(dists["PR6"],
                              chi.payload["decomposition"] if chi is not None else None),
        "fig4": top10_bar_chart(indicators),
        "fig5": margins_chart(margins_res) if margins_res is not None else
        BarChartSpec((), ("margin",), (), title="Adjusted predictions (regression skipped)",
                     y_label="Pr(top 10%)", kind="margins"),
    }


def run_report(corpus: Corpus, config: RunConfig, assignments=None) -> ReportResult:
    """Full analysis. Pass ``assignments`` when percentiles were already filled in."""
    errors: list[str] = []
    if assignments is None:
        corpus, assignments = prepare(corpus, config)
    report: dict = {"meta": {"tool": "percentile_impact", "version": __version__,
                             "config": config.describe()}}
    report.update(corpus_section(corpus, assignments))
    report["percentiles"]["scheme"] = config.scheme
    dists = class_distributions(corpus)
    report["distributions"] = {k: [d.to_dict() for d in v] for k, v in dists.items()}
    report["indicators"], indicators = indicator_section(corpus, config)
    report["tests"], pairwise, chi = tests_section(corpus, config, errors, dists["PR6"])
    report["regression"], margins_res = regression_section(corpus, config, errors)
    figs = figure_specs(corpus, dists, indicators, pairwise, chi, margins_res)
    report["figures"] = {k: v.to_dict() for k, v in figs.items()}
    report["statistical_errors"] = list(errors)
    svgs = {k: render_svg(v, *FIGURE_SIZES.get(k, (720, 420))) for k, v in figs.items()}
    return ReportResult(jsonable(report), svgs, errors)


def _try(fn, errors: list[str], section: str):
    try:
        return fn()
    except InferenceError as exc:
        errors.append(f"inference.{section}: {exc}")
        return None


def _last(errors: list[str], section: str) -> str:
    return next(e for e in reversed(errors) if e.startswith(f"inference.{section}:"))


def regression_section(corpus: Corpus, config: RunConfig, errors: list[str]):
    subset = regression_subset(corpus)
    counts = subset_counts(corpus, subset)
    if counts["empty"]:
        logger.warning("regression skipped: no records with percentile, pages and n_authors")
        return {"skipped": True, "reason": "no usable rows (pages/n_authors missing)",
                "subset": counts}, None
    try:
        design = build_design(subset, config.ref_group)
        fit = fit_clustered(design)
        m = margins(fit, design, level=config.ci_level)
    except RegressionError as exc:
        msg = f"regression.{type(exc).__name__}: {exc}"
        errors.append(msg)
        return {"skipped": False, "error": msg, "subset": counts}, None
    return {
        "skipped": False, "subset": counts,
        "design_summary": design_summary(design),
        "fit": fit.to_dict(),
        "margins": m.to_dict(),
        "statistic_label": "Wald z (beta / cluster-robust SE), normal reference",
    }, m


def write_outputs(result: ReportResult, out_dir, tables_text: str) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "report.json", out / "tables.txt"]
    paths[0].write_text(dumps(result.report), encoding="utf-8")
    paths[1].write_text(tables_text, encoding="utf-8")
    for name in FIGURES:
        p = out / f"{name}.svg"
        p.write_text(result.svgs[name], encoding="utf-8")
        paths.append(p)
    return paths
