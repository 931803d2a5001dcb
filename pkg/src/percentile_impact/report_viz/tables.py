"""Plain-text rendering of the report tables."""

from __future__ import annotations

import os

from ..regression import stars

NO_COLOR_ENV = "PERCENTILE_IMPACT_NO_COLOR"
BOLD, RESET = "\033[1m", "\033[0m"


def color_enabled(stream=None) -> bool:
    if os.environ.get(NO_COLOR_ENV):
        return False
    return bool(stream is not None and hasattr(stream, "isatty") and stream.isatty())


def _grid(header: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    fmt = lambda r: "  ".join(str(v).ljust(w) if i == 0 else str(v).rjust(w)
                              for i, (v, w) in enumerate(zip(r, widths)))
    lines = [fmt(header), "  ".join("-" * w for w in widths)]
    lines += [fmt(r) for r in rows]
    return lines


def _n(v) -> str:
    return f"{v:,}"


def _d2(v) -> str:
    return "" if v is None else f"{v:.2f}"


class _Doc:
    def __init__(self, color: bool):
        self.color = color
        self.lines: list[str] = []

    def heading(self, text: str):
        if self.lines:
            self.lines.append("")
        self.lines.append(f"{BOLD}{text}{RESET}" if self.color else text)
        self.lines.append("")

    def add(self, lines):
        self.lines.extend(lines)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def render_tables(report: dict, color: bool = False) -> str:
    doc = _Doc(color)
    _table1(doc, report)
    _table2(doc, report)
    _indicator_table(doc, report)
    _tests(doc, report)
    _table3(doc, report)
    return doc.text()


def _table1(doc, report):
    t = report["corpus"]["summary_table"]
    doc.heading("Table 1. Number of publications by publication year")
    header = ["Publication year", *t["groups"], "Total"]
    rows = [[str(r["year"]), *map(_n, r["counts"]), _n(r["total"])] for r in t["rows"]]
    rows.append(["Total", *map(_n, t["group_totals"]), _n(t["grand_total"])])
    doc.add(_grid(header, rows))


def _table2(doc, report):
    ind = report["indicators"]
    doc.heading("Table 2. Summary percentile statistics")
    header = ["Group", "Number of publications", "Minimum", "Maximum", "Mean",
              "Standard deviation", "Median"]
    rows = []
    for g in ind["groups"]:
        s = g["summary"]
        rows.append([g["group"], str(s["n"]), _d2(s["min"]), _d2(s["max"]), _d2(s["mean"]),
                     _d2(s["sd"]), _d2(s["median"])])
    s = ind["total"]
    if s is not None:
        rows.append(["Total", str(s["n"]), _d2(s["min"]), _d2(s["max"]), _d2(s["mean"]),
                     _d2(s["sd"]), _d2(s["median"])])
    doc.add(_grid(header, rows))


def _indicator_table(doc, report):
    ind = report["indicators"]
    doc.heading("I3 and top-10% indicators")
    header = ["Group", "n", "I3", "I3 max", "% of max", "Top-10% share", "CI lower",
              "CI upper", "h-index"]
    rows = []
    for g in ind["groups"]:
        t = g["top10"]
        rows.append([g["group"], str(g["n"]), f"{g['i3']:,.0f}", f"{g['i3_max']:,.0f}",
                     f"{g['i3_pct_of_max'] * 100:.0f}%", f"{t['share'] * 100:.2f}%",
                     f"{t['lower'] * 100:.2f}%", f"{t['upper'] * 100:.2f}%",
                     "" if g["h_index"] is None else str(g["h_index"])])
    doc.add(_grid(header, rows))
    pr6 = report["distributions"]["PR6"]
    if pr6:
        doc.heading("PR(6) class shares (%)")
        labels = pr6[0]["labels"]
        exp = [f"{lab} (exp {e * 100:g})" for lab, e in zip(labels, pr6[0]["expected_shares"])]
        rows = [[d["group"], *(f"{s * 100:.2f}" for s in d["shares"])] for d in pr6]
        doc.add(_grid(["Group", *exp], rows))


def _fmt_test(name: str, t: dict | None) -> str:
    if t is None:
        return f"{name}: not applicable"
    if "error" in t:
        return f"{name}: error: {t['error']}"
    df = t["df"]
    df_s = ",".join(map(str, df)) if isinstance(df, list) else str(df)
    sig = "significant" if t["significant"] else "not significant"
    return (f"{name}: statistic = {t['statistic']:.2f}, df = {df_s}, p = {t['p_value']:.4g} "
            f"({sig} at alpha = {t['alpha']:g})")


def _tests(doc, report):
    tests = report["tests"]
    doc.heading("Significance tests")
    lines = []
    for g, t in sorted(tests["normality"].items()):
        lines.append(_fmt_test(f"Normality (skewness/kurtosis), {g}", t))
    lines.append(_fmt_test("Kruskal-Wallis H", tests["kruskal_wallis"]))
    lines.append(_fmt_test("Chi-square independence (PR6)", tests["chi_square"]))
    doc.add(lines)
    pw = tests["pairwise"]
    if pw is not None and "comparisons" in pw:
        doc.heading(f"Pairwise rank-sum tests (Bonferroni, m = {pw['m']})")
        rows = [[f"{c['group_a']} vs {c['group_b']}", f"{c['statistic']:.2f}",
                 f"{c['raw_p']:.4g}", f"{c['adjusted_p']:.4g}", "yes" if c["significant"] else "no"]
                for c in pw["comparisons"]]
        doc.add(_grid(["Pair", "z", "raw p", "adjusted p", "significant"], rows))
    chi = tests["chi_square"]
    if chi is not None and "payload" in chi:
        dec = chi["payload"]["decomposition"]
        doc.heading("Chi-square contributions per cell")
        header = ["Class", *dec["row_labels"], "Total"]
        rows = []
        for j, col in enumerate(dec["col_labels"]):
            rows.append([col, *(f"{dec['contributions'][i][j]:.1f}"
                                for i in range(len(dec["row_labels"]))),
                         f"{dec['col_totals'][j]:.1f}"])
        rows.append(["Total", *(f"{v:.1f}" for v in dec["row_totals"]),
                     f"{chi['statistic']:.2f}"])
        doc.add(_grid(header, rows))


def _table3(doc, report):
    reg = report["regression"]
    doc.heading("Table 3. Binary regression model")
    if reg.get("skipped") or reg.get("error"):
        doc.add([f"skipped: {reg.get('reason') or reg.get('error')}"])
        return
    counts = reg["subset"]
    doc.add([f"(i) Characteristic values (n={counts['retained']})", ""])
    rows = [[v["variable"], _d2(v["mean"]), _d2(v["sd"]), f"{v['min']:g}", f"{v['max']:g}"]
            for v in reg["design_summary"]]
    doc.add(_grid(["Variable", "Mean", "Standard deviation", "Minimum", "Maximum"], rows))
    doc.add(["", "(ii) Results of the binary regression model (cluster-robust Wald z)", ""])
    rows = [[c["variable"], f"{c['coef']:.2f}{stars(c['p'])}", f"{c['se']:.3f}", f"{c['z']:.2f}"]
            for c in reg["fit"]["coefficients"]]
    rows.append(["Number of publications", str(reg["fit"]["n_rows"]), "", ""])
    rows.append(["Number of unique publications", str(reg["fit"]["n_clusters"]), "", ""])
    doc.add(_grid(["Variable", "Coefficient", "Robust SE", "z"], rows))
    doc.add(["", "(iii) Pairwise comparisons of marginal linear predictions (Bonferroni)", ""])
    rows = [[f"{c['group_a']} vs {c['group_b']}",
             f"{c['estimate']:.2f}{stars(c['adjusted_p'])}", f"{c['statistic']:.2f}"]
            for c in reg["margins"]["contrasts"]]
    doc.add(_grid(["Pair", "Contrast", "z"], rows))
    doc.add(["", "Adjusted predictions", ""])
    rows = [[p["group"], f"{p['margin']:.4f}", f"{p['lower']:.4f}", f"{p['upper']:.4f}"]
            for p in reg["margins"]["predictions"]]
    doc.add(_grid(["Group", "Margin", "CI lower", "CI upper"], rows))
    doc.add(["", "Notes: * p < .05, ** p < .01, *** p < .001"])
