"""Minimal self-contained SVG emission: line charts and boxplots.

The two figure types the reports need are simple enough that hand-rolled
SVG keeps the artifact dependency-free; output is well-formed XML with no
external references.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2")

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 64, 150, 34, 48


def _ticks(lo, hi, count=6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(count, 2)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * step:
        out.append(round(t, 12))
        t += step
    return out


def _fmt(x):
    return f"{x:.6g}"


class _Canvas:
    def __init__(self, title, xlabel, ylabel):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
            f'height="{_H}" viewBox="0 0 {_W} {_H}">',
            f'<rect width="{_W}" height="{_H}" fill="white"/>',
            f'<text x="{_ML + (_W - _ML - _MR) / 2}" y="20" '
            f'text-anchor="middle" font-family="sans-serif" font-size="14">'
            f"{escape(title)}</text>",
            f'<text x="{_ML + (_W - _ML - _MR) / 2}" y="{_H - 10}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="12">'
            f"{escape(xlabel)}</text>",
            f'<text x="16" y="{_MT + (_H - _MT - _MB) / 2}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 16 {_MT + (_H - _MT - _MB) / 2})">'
            f"{escape(ylabel)}</text>",
        ]

    def axes(self, xlo, xhi, ylo, yhi):
        if xhi <= xlo:
            xhi = xlo + 1.0
        if yhi <= ylo:
            yhi = ylo + 1.0
        pad = 0.05 * (yhi - ylo)
        self.xlo, self.xhi = xlo, xhi
        self.ylo, self.yhi = ylo - pad, yhi + pad
        x0, y0 = _ML, _H - _MB
        x1, y1 = _W - _MR, _MT
        self.parts.append(
            f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
            'fill="none" stroke="#333" stroke-width="1"/>')
        for t in _ticks(self.xlo, self.xhi):
            px = self.px(t)
            self.parts.append(
                f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 4}" '
                'stroke="#333"/>')
            self.parts.append(
                f'<text x="{px:.2f}" y="{y0 + 16}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="10">{_fmt(t)}</text>')
        for t in _ticks(self.ylo, self.yhi):
            py = self.py(t)
            self.parts.append(
                f'<line x1="{x0 - 4}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" '
                'stroke="#333"/>')
            self.parts.append(
                f'<text x="{x0 - 7}" y="{py + 3:.2f}" text-anchor="end" '
                f'font-family="sans-serif" font-size="10">{_fmt(t)}</text>')

    def px(self, x):
        return _ML + (x - self.xlo) / (self.xhi - self.xlo) * (_W - _ML - _MR)

    def py(self, y):
        return _H - _MB - (y - self.ylo) / (self.yhi - self.ylo) * (_H - _MT - _MB)

    def legend(self, names):
        x = _W - _MR + 12
        for i, name in enumerate(names):
            y = _MT + 14 + 16 * i
            color = _PALETTE[i % len(_PALETTE)]
            self.parts.append(
                f'<line x1="{x}" y1="{y - 4}" x2="{x + 18}" y2="{y - 4}" '
                f'stroke="{color}" stroke-width="2"/>')
            self.parts.append(
                f'<text x="{x + 24}" y="{y}" font-family="sans-serif" '
                f'font-size="11">{escape(str(name))}</text>')

    def render(self):
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def line_chart(x_values, series, title="", xlabel="", ylabel="",
               vline=None):
    """Multi-series line chart; ``series`` maps name -> y values.

    ``vline`` draws a dashed vertical asymptote (used for breakdown points).
    """
    xs = [float(v) for v in x_values]
    names = list(series)
    ys = [v for name in names for v in series[name]
          if v is not None and math.isfinite(v)]
    if not ys:
        raise ValueError("no finite values to plot")
    cv = _Canvas(title, xlabel, ylabel)
    xhi = max(xs + ([vline] if vline is not None else []))
    cv.axes(min(xs), xhi, min(ys), max(ys))
    if vline is not None:
        px = cv.px(vline)
        cv.parts.append(
            f'<line x1="{px:.2f}" y1="{_MT}" x2="{px:.2f}" y2="{_H - _MB}" '
            'stroke="#888" stroke-width="1" stroke-dasharray="5,4"/>')
    for i, name in enumerate(names):
        color = _PALETTE[i % len(_PALETTE)]
        pts = [(cv.px(x), cv.py(y)) for x, y in zip(xs, series[name])
               if y is not None and math.isfinite(y)]
        path = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        cv.parts.append(
            f'<polyline points="{path}" fill="none" stroke="{color}" '
            'stroke-width="1.8"/>')
        for x, y in pts:
            cv.parts.append(
                f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.4" fill="{color}"/>')
    cv.legend(names)
    return cv.render()


def boxplot(stats_by_label, title="", ylabel=""):
    """Boxplot from five-number summaries (as from ``boxplot_stats``)."""
    labels = list(stats_by_label)
    vals = []
    for s in stats_by_label.values():
        vals += [s["whisker_low"], s["whisker_high"]] + list(s["outliers"])
    cv = _Canvas(title, "", ylabel)
    cv.axes(0.0, float(len(labels)), min(vals), max(vals))
    width = (_W - _ML - _MR) / max(len(labels), 1)
    for i, label in enumerate(labels):
        s = stats_by_label[label]
        cx = cv.px(i + 0.5)
        half = 0.32 * width
        color = _PALETTE[i % len(_PALETTE)]
        for y in (s["whisker_low"], s["whisker_high"]):
            cv.parts.append(
                f'<line x1="{cx - half / 2:.2f}" y1="{cv.py(y):.2f}" '
                f'x2="{cx + half / 2:.2f}" y2="{cv.py(y):.2f}" stroke="#333"/>')
        cv.parts.append(
            f'<line x1="{cx:.2f}" y1="{cv.py(s["whisker_low"]):.2f}" '
            f'x2="{cx:.2f}" y2="{cv.py(s["q1"]):.2f}" stroke="#333"/>')
        cv.parts.append(
            f'<line x1="{cx:.2f}" y1="{cv.py(s["q3"]):.2f}" '
            f'x2="{cx:.2f}" y2="{cv.py(s["whisker_high"]):.2f}" stroke="#333"/>')
        cv.parts.append(
            f'<rect x="{cx - half:.2f}" y="{cv.py(s["q3"]):.2f}" '
            f'width="{2 * half:.2f}" '
            f'height="{cv.py(s["q1"]) - cv.py(s["q3"]):.2f}" '
            f'fill="{color}" fill-opacity="0.35" stroke="#333"/>')
        cv.parts.append(
            f'<line x1="{cx - half:.2f}" y1="{cv.py(s["median"]):.2f}" '
            f'x2="{cx + half:.2f}" y2="{cv.py(s["median"]):.2f}" '
            'stroke="#000" stroke-width="1.6"/>')
        for o in s["outliers"]:
            cv.parts.append(
                f'<circle cx="{cx:.2f}" cy="{cv.py(o):.2f}" r="2.5" '
                'fill="none" stroke="#333"/>')
        cv.parts.append(
            f'<text x="{cx:.2f}" y="{_H - _MB + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{escape(str(label))}</text>')
    return cv.render()
