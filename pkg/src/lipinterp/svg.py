"""Minimal deterministic SVG line plots for study outputs.

Output depends only on the inputs (fixed precision, no timestamps or random ids), so
identical results render to byte-identical documents.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import InputError

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=40, bottom=50)


@dataclass
class Series:
    x: Sequence[float]
    y: Sequence[float]
    label: str = ""
    color: str = "#1f77b4"
    dashed: bool = False
    opacity: float = 1.0
    stroke_width: float = 1.5


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick(v: float, log: bool) -> str:
    if log:
        return f"{math.exp(v):.3g}"
    return f"{v:.3g}"


def render_svg(series: List[Series], title: str = "", xlabel: str = "", ylabel: str = "",
               logx: bool = False, logy: bool = False) -> str:
    if not series or any(len(s.x) == 0 for s in series):
        raise InputError("cannot plot an empty series")
    tx = (lambda v: np.log(v)) if logx else (lambda v: v)
    ty = (lambda v: np.log(v)) if logy else (lambda v: v)
    with np.errstate(divide="ignore", invalid="ignore"):  # rejected below as non-finite
        xs = [tx(np.asarray(s.x, dtype=float)) for s in series]
        ys = [ty(np.asarray(s.y, dtype=float)) for s in series]
    if any(len(x) != len(y) for x, y in zip(xs, ys)):
        raise InputError("series x and y must have equal length")
    allx, ally = np.concatenate(xs), np.concatenate(ys)
    if not (np.all(np.isfinite(allx)) and np.all(np.isfinite(ally))):
        raise InputError("non-finite values (log scale needs positive data)")
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def py(v):
        return MARGIN["top"] + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{MARGIN["left"] + pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    if ylabel:
        cy = MARGIN["top"] + ph / 2
        out.append(f'<text x="16" y="{cy:.1f}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {cy:.1f})">{escape(ylabel)}</text>')
    for k in range(5):
        fx = x0 + (x1 - x0) * k / 4
        fy = y0 + (y1 - y0) * k / 4
        out.append(f'<text x="{_fmt(px(fx))}" y="{MARGIN["top"] + ph + 16}" text-anchor="middle" font-size="10">{_tick(fx, logx)}</text>')
        out.append(f'<text x="{MARGIN["left"] - 6}" y="{_fmt(py(fy) + 3)}" text-anchor="end" font-size="10">{_tick(fy, logy)}</text>')
    for s, x, y in zip(series, xs, ys):
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x.tolist(), y.tolist()))
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        label = f"<title>{escape(s.label)}</title>" if s.label else ""
        out.append(f'<polyline fill="none" stroke="{s.color}" stroke-width="{s.stroke_width}" '
                   f'stroke-opacity="{s.opacity}"{dash} points="{pts}">{label}</polyline>')
    legend = [s for s in series if s.label and s.opacity >= 1.0]
    for i, s in enumerate(legend):
        ly = MARGIN["top"] + 14 + 16 * i
        lx = MARGIN["left"] + pw - 170
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{s.color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 30}" y="{ly + 4}" font-size="11">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def study_svg(sample_sizes, mean_errors, exponent: Optional[float] = None, title: str = "Sup-norm error") -> str:
    """Log-log mean error against n, with ``(log n / n) ** exponent`` anchored at the first n."""
    ns = np.asarray(sample_sizes, dtype=float)
    series = [Series(ns, mean_errors, label="empirical mean", color="#1f77b4")]
    if exponent is not None:
        rate = (np.log(ns) / ns) ** exponent
        scale = float(mean_errors[0]) / float(rate[0])
        series.append(Series(ns, scale * rate, label=f"rate, exponent {exponent:.3g}", color="#d62728", dashed=True))
    return render_svg(series, title=title, xlabel="n", ylabel="sup error", logx=True, logy=True)


def trajectory_svg(errors, delta: float, title: str = "Tracking error") -> str:
    """One faint line per repetition plus the dashed mean, against simulation time."""
    errors = np.asarray(errors, dtype=float)
    if errors.ndim != 2 or errors.size == 0:
        raise InputError("expected a nonempty (repetitions, steps) array")
    t = delta * np.arange(errors.shape[1])
    palette = ("#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf")
    series = [Series(t, row, color=palette[i % len(palette)], opacity=0.35, stroke_width=1.0)
              for i, row in enumerate(errors)]
    series.append(Series(t, errors.mean(axis=0), label="mean", color="black", dashed=True, stroke_width=2.0))
    return render_svg(series, title=title, xlabel="time [s]", ylabel="||xi - x||")
