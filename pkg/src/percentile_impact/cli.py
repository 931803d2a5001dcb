"""Command-line front end.

Exit codes: 0 success, 1 input/validation failure, 2 statistical failure
(e.g. separation in the regression, an empty chi-square margin).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .corpus import CorpusError, load, write_csv
from .percentiles import SCHEMES, PercentileError, assign_corpus_percentiles
from .pipeline import (
    FIGURE_SIZES,
    FIGURES,
    RunConfig,
    class_distributions,
    dumps,
    figure_specs,
    indicator_section,
    jsonable,
    regression_section,
    run_report,
    tests_section,
    write_outputs,
)
from .report_viz import render_svg, render_tables
from .report_viz.tables import color_enabled

EXIT_OK, EXIT_INPUT, EXIT_STAT = 0, 1, 2


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", "-i", required=True, help="publication CSV or JSON file")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    p.add_argument("--scheme", choices=SCHEMES, default="incites_ge",
                   help="percentile rule for records without a pre-assigned percentile")
    p.add_argument("--ci", dest="ci_method", choices=("wilson", "wald"), default="wilson")
    p.add_argument("--ci-level", type=float, default=0.95)
    p.add_argument("--alpha", type=float, default=0.001)
    p.add_argument("--ref-group", default=None, help="reference group for the regression")
    p.add_argument("--out-dir", default=".", help="directory for written artifacts")
    p.add_argument("--fail-fast", action="store_true", help="abort on the first invalid row")
    p.add_argument("--delimiter", default=",")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="percentile-impact",
        description="Analyse percentile-based citation impact of publication sets.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    helps = {
        "report": "full pipeline: report.json, tables.txt and fig1-fig5 SVGs",
        "validate": "check an input file and list rejected rows",
        "percentiles": "assign percentiles from citation counts and write percentiles.csv",
        "classify": "PR(6)/PR(2) class distributions per group",
        "indicators": "I3, top-10%% share, summary statistics and h-index per group",
        "test": "normality, Kruskal-Wallis, pairwise and chi-square tests",
        "regress": "cluster-robust logistic regression with margins",
        "plot": "write fig1-fig5 as SVG plus their JSON specs",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def _config(args) -> RunConfig:
    return RunConfig(input=args.input, fmt=args.fmt, scheme=args.scheme,
                     ci_method=args.ci_method, ci_level=args.ci_level, alpha=args.alpha,
                     ref_group=args.ref_group, out_dir=args.out_dir)


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _config(args)
    except ValueError as exc:
        print(f"cli: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        kwargs = {"fail_fast": args.fail_fast}
        if args.fmt == "csv":
            kwargs["delimiter"] = args.delimiter
        corpus = load(args.input, args.fmt, **kwargs)
    except CorpusError as exc:
        print(f"corpus: {exc}", file=sys.stderr)
        return EXIT_INPUT

    rejected = [d for d in corpus.diagnostics if d.severity == "error"]
    for d in corpus.diagnostics:
        print(f"corpus: {d}", file=sys.stderr)
    if args.command == "validate":
        print(f"{len(corpus)} records ({corpus.n_unique} unique publications), "
              f"{len(rejected)} rejected row(s)")
        return EXIT_INPUT if rejected else EXIT_OK
    if len(corpus) == 0:
        print("corpus: no valid records", file=sys.stderr)
        return EXIT_INPUT

    try:
        corpus, assignments = assign_corpus_percentiles(corpus, config.scheme)
    except PercentileError as exc:
        print(f"percentile_engine: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return COMMANDS[args.command](corpus, assignments, config)


def cmd_report(corpus, assignments, config: RunConfig) -> int:
    result = run_report(corpus, config, assignments)
    paths = write_outputs(result, config.out_dir, render_tables(result.report))
    sys.stdout.write(render_tables(result.report, color=color_enabled(sys.stdout)))
    for p in paths:
        print(f"wrote {p}")
    for e in result.statistical_errors:
        print(e, file=sys.stderr)
    return EXIT_STAT if result.statistical_errors else EXIT_OK


def cmd_percentiles(corpus, assignments, config: RunConfig) -> int:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(corpus, out / "percentiles.csv")
    _emit({"assigned": [{"pub_id": a.pub_id, "percentile": a.percentile,
                         "refset_key": list(a.refset_key), "refset_size": a.refset_size,
                         "scheme": a.scheme} for a in assignments],
           "output": str(out / "percentiles.csv")})
    return EXIT_OK


def cmd_classify(corpus, assignments, config: RunConfig) -> int:
    dists = class_distributions(corpus)
    _emit({k: [d.to_dict() for d in v] for k, v in dists.items()})
    return EXIT_OK


def cmd_indicators(corpus, assignments, config: RunConfig) -> int:
    section, _ = indicator_section(corpus, config)
    _emit(section)
    return EXIT_OK


def cmd_test(corpus, assignments, config: RunConfig) -> int:
    errors: list[str] = []
    section, _, _ = tests_section(corpus, config, errors)
    _emit(section)
    for e in errors:
        print(e, file=sys.stderr)
    return EXIT_STAT if errors else EXIT_OK


def cmd_regress(corpus, assignments, config: RunConfig) -> int:
    errors: list[str] = []
    section, _ = regression_section(corpus, config, errors)
    _emit(section)
    if section.get("skipped"):
        print("regression: skipped, no usable rows", file=sys.stderr)
    for e in errors:
        print(e, file=sys.stderr)
    return EXIT_STAT if errors else EXIT_OK


def cmd_plot(corpus, assignments, config: RunConfig) -> int:
    errors: list[str] = []
    dists = class_distributions(corpus)
    _, indicators = indicator_section(corpus, config)
    _, pairwise, chi = tests_section(corpus, config, errors, dists["PR6"])
    _, margins_res = regression_section(corpus, config, errors)
    figs = figure_specs(corpus, dists, indicators, pairwise, chi, margins_res)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in FIGURES:
        size = FIGURE_SIZES.get(name, (720, 420))
        (out / f"{name}.svg").write_text(render_svg(figs[name], *size), encoding="utf-8")
        print(f"wrote {out / f'{name}.svg'}")
    (out / "figures.json").write_text(
        json.dumps(jsonable({k: v.to_dict() for k, v in figs.items()}), indent=2) + "\n",
        encoding="utf-8")
    for e in errors:
        print(e, file=sys.stderr)
    return EXIT_STAT if errors else EXIT_OK


COMMANDS = {
    "report": cmd_report,
    "percentiles": cmd_percentiles,
    "classify": cmd_classify,
    "indicators": cmd_indicators,
    "test": cmd_test,
    "regress": cmd_regress,
    "plot": cmd_plot,
}


if __name__ == "__main__":
    sys.exit(main())
