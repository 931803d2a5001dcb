from .specs import (
    BarChartSpec,
    BoxPlotSpec,
    SpecError,
    ViolinSpec,
    boxplots_by_year,
    margins_chart,
    pr6_bar_chart,
    top10_bar_chart,
    violin,
)
from .svg import render_svg
from .tables import render_tables

__all__ = [
    "BarChartSpec", "BoxPlotSpec", "SpecError", "ViolinSpec", "boxplots_by_year",
    "margins_chart", "pr6_bar_chart", "render_svg", "render_tables", "top10_bar_chart",
    "violin",
]
