"""Minimal SVG line chart of hourly average power, built with ElementTree."""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Sequence

WIDTH = 800
HEIGHT = 500
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 30, 40, 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _nice_ceiling(x: float) -> float:
    if x <= 0:
        return 1.0
    mag = 10 ** math.floor(math.log10(x))
    for m in (1, 2, 2.5, 5, 10):
        if m * mag >= x:
            return m * mag
    return 10 * mag


def line_chart(
    labels: Sequence[str],
    series: Sequence[tuple[str, Sequence[float]]],
    title: str = "Average power per hour",
    x_label: str = "Hour of day",
    y_label: str = "Average power (W)",
) -> ET.Element:
    """Build an 800x500 chart with one polyline per named series."""
    if not labels:
        raise ValueError("need at least one x label")
    for name, ys in series:
        if len(ys) != len(labels):
            raise ValueError(f"series {name!r} has {len(ys)} points for {len(labels)} labels")

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    y_max = _nice_ceiling(max((max(ys) for _, ys in series if len(ys)), default=1.0))
    n = len(labels)

    def sx(k):
        return MARGIN_LEFT + (plot_w * k / (n - 1) if n > 1 else plot_w / 2)

    def sy(v):
        return MARGIN_TOP + plot_h * (1.0 - v / y_max)

    svg = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "width": str(WIDTH), "height": str(HEIGHT),
        "viewBox": f"0 0 {WIDTH} {HEIGHT}",
    })
    ET.SubElement(svg, "rect", {"x": "0", "y": "0", "width": str(WIDTH), "height": str(HEIGHT), "fill": "white"})
    ET.SubElement(svg, "text", {
        "x": str(WIDTH / 2), "y": "24", "text-anchor": "middle", "font-size": "16", "font-family": "sans-serif",
    }).text = title

    axes = ET.SubElement(svg, "g", {"id": "axes", "stroke": "black", "font-family": "sans-serif", "font-size": "11"})
    bottom = MARGIN_TOP + plot_h
    ET.SubElement(axes, "line", {"x1": str(MARGIN_LEFT), "y1": str(bottom), "x2": str(MARGIN_LEFT + plot_w), "y2": str(bottom)})
    ET.SubElement(axes, "line", {"x1": str(MARGIN_LEFT), "y1": str(MARGIN_TOP), "x2": str(MARGIN_LEFT), "y2": str(bottom)})
    for k, lab in enumerate(labels):
        x = f"{sx(k):.2f}"
        ET.SubElement(axes, "line", {"x1": x, "y1": str(bottom), "x2": x, "y2": str(bottom + 5)})
        ET.SubElement(axes, "text", {"x": x, "y": str(bottom + 18), "text-anchor": "middle", "stroke": "none"}).text = lab
    for k in range(6):
        v = y_max * k / 5
        y = f"{sy(v):.2f}"
        ET.SubElement(axes, "line", {"x1": str(MARGIN_LEFT - 5), "y1": y, "x2": str(MARGIN_LEFT), "y2": y})
        ET.SubElement(axes, "text", {
            "x": str(MARGIN_LEFT - 8), "y": y, "text-anchor": "end", "dominant-baseline": "middle", "stroke": "none",
        }).text = f"{v:g}"
    ET.SubElement(axes, "text", {
        "id": "x-label", "x": str(MARGIN_LEFT + plot_w / 2), "y": str(HEIGHT - 15),
        "text-anchor": "middle", "stroke": "none", "font-size": "13",
    }).text = x_label
    ET.SubElement(axes, "text", {
        "id": "y-label", "x": "18", "y": str(MARGIN_TOP + plot_h / 2), "text-anchor": "middle", "stroke": "none",
        "font-size": "13", "transform": f"rotate(-90 18 {MARGIN_TOP + plot_h / 2})",
    }).text = y_label

    for j, (name, ys) in enumerate(series):
        color = COLORS[j % len(COLORS)]
        points = " ".join(f"{sx(k):.2f},{sy(v):.2f}" for k, v in enumerate(ys))
        ET.SubElement(svg, "polyline", {
            "points": points, "fill": "none", "stroke": color, "stroke-width": "2", "data-series": name,
        })
        ly = MARGIN_TOP + 10 + 18 * j
        lx = MARGIN_LEFT + plot_w - 150
        ET.SubElement(svg, "line", {"x1": str(lx), "y1": str(ly), "x2": str(lx + 20), "y2": str(ly),
                                    "stroke": color, "stroke-width": "2"})
        ET.SubElement(svg, "text", {"x": str(lx + 26), "y": str(ly + 4), "font-size": "12",
                                    "font-family": "sans-serif"}).text = name
    return svg


def write_chart(path: str | Path, labels: Sequence[str], series: Sequence[tuple[str, Sequence[float]]], **kwargs) -> None:
    tree = ET.ElementTree(line_chart(labels, series, **kwargs))
    ET.indent(tree)
    tree.write(path, encoding="utf-8", xml_declaration=True)
