"""Dependency-free SVG line plots with byte-stable output."""
from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ParameterError
from .trajectory import read_csv

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#000000", "#9467bd", "#ff7f0e", "#8c564b")
WIDTH, HEIGHT = 640, 400
MARGIN = (60, 20, 20, 50)  # left, right, top, bottom


def _f(v: float) -> str:
    return f"{v:.2f}"


def render_svg(
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    xlabel: str = "t",
    ylabel: str = "",
    title: str = "",
) -> str:
    """One polyline per series, in insertion order."""
    if not series:
        raise ParameterError("nothing to plot")
    xs = np.concatenate([np.asarray(x, float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, float) for _, y in series.values()])
    finite = np.isfinite(xs) & np.isfinite(ys)
    if not finite.any():
        raise ParameterError("no finite data to plot")
    x0, x1 = float(xs[finite].min()), float(xs[finite].max())
    y0, y1 = float(ys[finite].min()), float(ys[finite].max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.0f}" y="14" text-anchor="middle" font-size="12">{title}</text>')
    out.append(f'<text x="{left + pw / 2:.0f}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">{xlabel}</text>')
    out.append(f'<text x="14" y="{top + ph / 2:.0f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 14 {top + ph / 2:.0f})">{ylabel}</text>')
    for v, anchor, x, y in (
        (x0, "start", left, HEIGHT - bottom + 14), (x1, "end", left + pw, HEIGHT - bottom + 14),
    ):
        out.append(f'<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="10">{v:.4g}</text>')
    out.append(f'<text x="{left - 4}" y="{top + ph}" text-anchor="end" font-size="10">{y0:.4g}</text>')
    out.append(f'<text x="{left - 4}" y="{top + 10}" text-anchor="end" font-size="10">{y1:.4g}</text>')
    for k, (name, (x, y)) in enumerate(series.items()):
        colour = PALETTE[k % len(PALETTE)]
        pts = " ".join(
            f"{_f(px(a))},{_f(py(b))}" for a, b in zip(x, y) if np.isfinite(a) and np.isfinite(b)
        )
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.2" points="{pts}"/>')
        ly = top + 14 + 14 * k
        out.append(f'<line x1="{left + pw - 120}" y1="{ly - 4}" x2="{left + pw - 100}" y2="{ly - 4}" '
                   f'stroke="{colour}"/>')
        out.append(f'<text x="{left + pw - 96}" y="{ly}" font-size="10">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(
    files: Mapping[str, str | Path],
    column: str,
    path: str | Path,
    x_column: str = "t",
    ylabel: str | None = None,
) -> str:
    """Plot ``column`` from each named trajectory CSV into ``path``."""
    series = {}
    for name, f in files.items():
        data = read_csv(f)
        for col in (x_column, column):
            if col not in data:
                raise ParameterError(f"column {col!r} missing from {f}")
        series[name] = (data[x_column], data[column])
    svg = render_svg(series, x_column, ylabel or column)
    Path(path).write_text(svg)
    return svg
