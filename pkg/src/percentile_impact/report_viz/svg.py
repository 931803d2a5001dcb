"""Standalone SVG 1.1 rendering of chart specs.

Output is built from the spec's JSON form with fixed number formatting, so
identical specs give byte-identical documents.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .specs import SpecError

PALETTE = ("#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948",
           "#b07aa1", "#ff9da7")
MARGIN = {"left": 64, "right": 20, "top": 44, "bottom": 64}
FONT = 'font-family="Helvetica,Arial,sans-serif"'


def _f(v: float) -> str:
    return f"{v:.2f}"


def _text(x, y, s, size=11, anchor="middle", extra="") -> str:
    return (f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" text-anchor="{anchor}" '
            f'{FONT}{extra}>{escape(str(s))}</text>')


def _line(x1, y1, x2, y2, stroke="#000", width=1.0, dash=None) -> str:
    d = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke="{stroke}" stroke-width="{_f(width)}"{d}/>')


def _rect(x, y, w, h, fill, stroke="none") -> str:
    return (f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(max(w, 0))}" height="{_f(max(h, 0))}" '
            f'fill="{fill}" stroke="{stroke}"/>')


def nice_ticks(vmax: float, n: int = 5) -> list[float]:
    if vmax <= 0 or not math.isfinite(vmax):
        return [0.0, 1.0]
    raw = vmax / n
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    top = math.ceil(vmax / step - 1e-9) * step
    count = int(round(top / step))
    return [round(i * step, 10) for i in range(count + 1)]


class _Canvas:
    def __init__(self, width, height, title, y_label, ticks):
        self.w, self.h = width, height
        self.x0, self.x1 = MARGIN["left"], width - MARGIN["right"]
        self.y0, self.y1 = height - MARGIN["bottom"], MARGIN["top"]
        self.ticks = ticks
        self.ymin, self.ymax = ticks[0], ticks[-1]
        self.parts: list[str] = []
        self.title, self.y_label = title, y_label

    def y(self, v: float) -> float:
        span = (self.ymax - self.ymin) or 1.0
        return self.y0 - (v - self.ymin) / span * (self.y0 - self.y1)

    def axes(self):
        p = self.parts
        p.append(_line(self.x0, self.y0, self.x1, self.y0))
        p.append(_line(self.x0, self.y0, self.x0, self.y1))
        for t in self.ticks:
            yy = self.y(t)
            p.append(_line(self.x0 - 4, yy, self.x0, yy))
            p.append(_text(self.x0 - 7, yy + 4, f"{t:g}", 10, "end"))
        if self.title:
            p.append(_text(self.w / 2, 22, self.title, 14))
        if self.y_label:
            cy = (self.y0 + self.y1) / 2
            p.append(_text(16, cy, self.y_label, 11,
                           extra=f' transform="rotate(-90 16.00 {_f(cy)})"'))

    def document(self) -> str:
        head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
                f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                f'width="{self.w}" height="{self.h}" viewBox="0 0 {self.w} {self.h}">\n'
                f'<rect x="0" y="0" width="{self.w}" height="{self.h}" fill="#ffffff"/>\n')
        return head + "\n".join(self.parts) + "\n</svg>\n"


def _as_dict(spec) -> dict:
    return spec.to_dict() if hasattr(spec, "to_dict") else dict(spec)


def render_svg(spec, width: int = 720, height: int = 420) -> str:
    """Render a bar, violin or box-plot spec (object or its dict form) to SVG."""
    if width <= 0 or height <= 0:
        raise SpecError(f"zero-size canvas ({width}x{height})")
    d = _as_dict(spec)
    kind = d.get("type")
    if kind == "bars":
        return _render_bars(d, width, height)
    if kind == "violin":
        return _render_violin(d, width, height)
    if kind == "boxplot":
        return _render_boxplot(d, width, height)
    raise SpecError(f"unknown chart type {kind!r}")


def _render_bars(d: dict, width: int, height: int) -> str:
    cats, series, bars = d["categories"], d["series"], d["bars"]
    errs = {(e["category"], e["series"]): e for e in d.get("error_bars", [])}
    notes = {(a["category"], a["series"]): a for a in d.get("annotations", [])}
    values = [b["value"] for b in bars] + [e["upper"] for e in errs.values()]
    values += [r["value"] for r in d.get("reference_lines", [])]
    c = _Canvas(width, height, d.get("title", ""), d.get("y_label", ""),
                nice_ticks(max(values, default=0.0) * (1.12 if notes else 1.05)))
    c.axes()
    p = c.parts
    band = (c.x1 - c.x0) / max(len(cats), 1)
    bar_w = band * 0.8 / max(len(series), 1)
    lookup = {(b["category"], b["series"]): b for b in bars}
    for i, cat in enumerate(cats):
        left = c.x0 + i * band + band * 0.1
        p.append(_text(c.x0 + (i + 0.5) * band, c.y0 + 16, cat, 10))
        for j, s in enumerate(series):
            b = lookup.get((cat, s))
            if b is None:
                continue
            x = left + j * bar_w
            top = c.y(b["value"])
            p.append(_rect(x + 1, top, bar_w - 2, c.y0 - top, PALETTE[j % len(PALETTE)]))
            cx = x + bar_w / 2
            label_y = top - 4
            e = errs.get((cat, s))
            if e is not None:
                ylo, yhi = c.y(e["lower"]), c.y(e["upper"])
                p.append(_line(cx, ylo, cx, yhi, width=1.2))
                p.append(_line(cx - 4, ylo, cx + 4, ylo, width=1.2))
                p.append(_line(cx - 4, yhi, cx + 4, yhi, width=1.2))
                label_y = min(label_y, yhi - 4)
            if b.get("label"):
                size = min(9.0, bar_w / 3.2)
                p.append(_text(cx, c.y0 + 30 if notes else label_y, b["label"], f"{size:.1f}"))
            a = notes.get((cat, s))
            if a is not None:
                p.append(_text(cx, label_y, a["text"], 9))
    for r in d.get("reference_lines", []):
        dash = "6,4" if r.get("style") == "dashed" else None
        yy = c.y(r["value"])
        if "category" in r and r["category"] in cats:
            i = cats.index(r["category"])
            p.append(_line(c.x0 + i * band + 2, yy, c.x0 + (i + 1) * band - 2, yy,
                           "#333", 1.2, dash))
        else:
            p.append(_line(c.x0, yy, c.x1, yy, "#333", 1.2, dash))
    if len(series) > 1:
        for j, s in enumerate(series):
            x = c.x0 + 8 + j * 110
            p.append(_rect(x, c.h - 20, 10, 10, PALETTE[j % len(PALETTE)]))
            p.append(_text(x + 14, c.h - 11, s, 10, "start"))
    return c.document()


def _render_violin(d: dict, width: int, height: int) -> str:
    groups = d["violin"]
    c = _Canvas(width, height, d.get("title", ""), d.get("y_label", ""),
                [0, 20, 40, 60, 80, 100])
    c.axes()
    p = c.parts
    band = (c.x1 - c.x0) / max(len(groups), 1)
    dmax = max((max(g["density"]) for g in groups if g["density"]), default=1.0) or 1.0
    for i, g in enumerate(groups):
        cx = c.x0 + (i + 0.5) * band
        half = band * 0.4
        colour = PALETTE[i % len(PALETTE)]
        if g["density"]:
            right = [(cx + dv / dmax * half, c.y(gv)) for gv, dv in zip(g["grid"], g["density"])]
            left = [(cx - dv / dmax * half, c.y(gv)) for gv, dv in reversed(list(zip(g["grid"], g["density"])))]
            pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in right + left)
            p.append(f'<polygon points="{pts}" fill="{colour}" fill-opacity="0.45" stroke="{colour}"/>')
        else:
            p.append(_line(cx - half, c.y(g["point_mass"]), cx + half, c.y(g["point_mass"]),
                           colour, 2.0))
        p.append(_line(cx, c.y(g["lower_adjacent"]), cx, c.y(g["upper_adjacent"]), "#000", 1.0))
        p.append(_rect(cx - 5, c.y(g["q3"]), 10, c.y(g["q1"]) - c.y(g["q3"]), "#333"))
        p.append(f'<circle cx="{_f(cx)}" cy="{_f(c.y(g["median"]))}" r="3.5" fill="#ffffff"/>')
        p.append(_text(cx, c.y0 + 16, g["group"], 11))
    return c.document()


def _render_boxplot(d: dict, width: int, height: int) -> str:
    boxes = d["boxplot"]
    labels = d.get("labels", [])
    groups = [lab["group"] for lab in labels] or sorted({b["group"] for b in boxes})
    c = _Canvas(width, height, d.get("title", ""), d.get("y_label", ""),
                [0, 20, 40, 60, 80, 100])
    c.axes()
    p = c.parts
    band = (c.x1 - c.x0) / max(len(groups), 1)
    for r in d.get("reference_lines", []):
        p.append(_line(c.x0, c.y(r["value"]), c.x1, c.y(r["value"]), "#555", 1.0))
    for i, g in enumerate(groups):
        gb = [b for b in boxes if b["group"] == g]
        slot = band * 0.9 / max(len(gb), 1)
        left = c.x0 + i * band + band * 0.05
        colour = PALETTE[i % len(PALETTE)]
        for j, b in enumerate(gb):
            cx = left + (j + 0.5) * slot
            w = slot * 0.7
            p.append(_line(cx, c.y(b["whisker_low"]), cx, c.y(b["q1"])))
            p.append(_line(cx, c.y(b["q3"]), cx, c.y(b["whisker_high"])))
            p.append(_rect(cx - w / 2, c.y(b["q3"]), w, c.y(b["q1"]) - c.y(b["q3"]), colour, "#000"))
            my = c.y(b["median"])
            p.append(_line(cx - 3, my - 3, cx + 3, my + 3, "#000", 1.2))
            p.append(_line(cx - 3, my + 3, cx + 3, my - 3, "#000", 1.2))
            p.append(_text(cx, c.y0 + 12, str(b["year"])[-2:], 8))
        lab = next((x for x in labels if x["group"] == g), None)
        text = g
        if lab is not None and lab.get("median_all_years") is not None:
            text = f"{g} (med={lab['median_all_years']:.2f})"
        p.append(_text(c.x0 + (i + 0.5) * band, c.y0 + 28, text, 10))
        if lab is not None and lab.get("differs_from"):
            p.append(_text(c.x0 + (i + 0.5) * band, c.y0 + 42,
                           "differs from " + ", ".join(lab["differs_from"]), 9))
    return c.document()
