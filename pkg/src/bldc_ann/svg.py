"""Minimal static SVG line charts.

Output depends only on the input numbers, so identical data gives
identical bytes.
"""
from __future__ import annotations

from html import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
MAX_POINTS = 2000


def _ticks(lo, hi, count=5):
    if hi == lo:
        return [lo]
    return list(np.linspace(lo, hi, count))


def _decimate(x, y, limit=MAX_POINTS):
    """Keep at most ``limit`` points, preserving each bucket's min and max."""
    n = len(x)
    if n <= limit:
        return x, y
    buckets = np.array_split(np.arange(n), limit // 2)
    keep = []
    for idx in buckets:
        lo = idx[np.argmin(y[idx])]
        hi = idx[np.argmax(y[idx])]
        keep.extend(sorted({lo, hi}))
    keep = np.array(keep)
    return x[keep], y[keep]


class Panel:
    """One plotting area: a set of named series sharing axes."""

    def __init__(self, title="", ylabel="", step=False):
        self.title = title
        self.ylabel = ylabel
        self.step = step
        self.series = []

    def add(self, x, y, label=""):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self.series.append((x, y, label))
        return self


def _fmt(v):
    return f"{v:.2f}"


def _render_panel(panel, x0, y0, w, h, xlabel, out):
    xs = np.concatenate([s[0] for s in panel.series]) if panel.series else np.array([0.0, 1.0])
    ys = np.concatenate([s[1] for s in panel.series]) if panel.series else np.array([0.0, 1.0])
    finite = np.isfinite(ys)
    xmin, xmax = float(xs.min()), float(xs.max())
    ymin, ymax = (float(ys[finite].min()), float(ys[finite].max())) if finite.any() else (0.0, 1.0)
    if ymax == ymin:
        ymin, ymax = ymin - 0.5, ymax + 0.5
    pad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - pad, ymax + pad
    if xmax == xmin:
        xmax = xmin + 1.0

    def px(v):
        return x0 + (v - xmin) / (xmax - xmin) * w

    def py(v):
        return y0 + h - (v - ymin) / (ymax - ymin) * h

    out.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(w)}" height="{_fmt(h)}" '
               'fill="none" stroke="#444" stroke-width="1"/>')
    for tv in _ticks(ymin + pad, ymax - pad):
        out.append(f'<line x1="{_fmt(x0 - 4)}" y1="{_fmt(py(tv))}" x2="{_fmt(x0)}" '
                   f'y2="{_fmt(py(tv))}" stroke="#444"/>')
        out.append(f'<text x="{_fmt(x0 - 6)}" y="{_fmt(py(tv) + 4)}" font-size="10" '
                   f'text-anchor="end">{tv:.4g}</text>')
    for tv in _ticks(xmin, xmax):
        out.append(f'<line x1="{_fmt(px(tv))}" y1="{_fmt(y0 + h)}" x2="{_fmt(px(tv))}" '
                   f'y2="{_fmt(y0 + h + 4)}" stroke="#444"/>')
        out.append(f'<text x="{_fmt(px(tv))}" y="{_fmt(y0 + h + 16)}" font-size="10" '
                   f'text-anchor="middle">{tv:.4g}</text>')
    if panel.title:
        out.append(f'<text x="{_fmt(x0 + w / 2)}" y="{_fmt(y0 - 8)}" font-size="12" '
                   f'text-anchor="middle">{escape(panel.title)}</text>')
    if panel.ylabel:
        cx, cy = x0 - 48, y0 + h / 2
        out.append(f'<text x="{_fmt(cx)}" y="{_fmt(cy)}" font-size="11" text-anchor="middle" '
                   f'transform="rotate(-90 {_fmt(cx)} {_fmt(cy)})">{escape(panel.ylabel)}</text>')
    if xlabel:
        out.append(f'<text x="{_fmt(x0 + w / 2)}" y="{_fmt(y0 + h + 32)}" font-size="11" '
                   f'text-anchor="middle">{escape(xlabel)}</text>')

    for k, (x, y, label) in enumerate(panel.series):
        color = PALETTE[k % len(PALETTE)]
        x, y = _decimate(x, y)
        if panel.step and len(x) > 1:
            x = np.repeat(x, 2)[1:]
            y = np.repeat(y, 2)[:-1]
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, y) if np.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        if label:
            ly = y0 + 14 + 14 * k
            out.append(f'<line x1="{_fmt(x0 + w - 110)}" y1="{_fmt(ly - 4)}" x2="{_fmt(x0 + w - 92)}" '
                       f'y2="{_fmt(ly - 4)}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{_fmt(x0 + w - 88)}" y="{_fmt(ly)}" font-size="10">'
                       f'{escape(label)}</text>')


def render(panels, title="", xlabel="time (s)", width=800, panel_height=160) -> str:
    """Stack ``panels`` vertically on a shared x label and return the SVG text."""
    left, right, top, gap = 80, 20, 40 if title else 24, 56
    plot_w = width - left - right
    height = top + len(panels) * (panel_height + gap)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:.2f}" y="20" font-size="14" text-anchor="middle" '
                   f'font-weight="bold">{escape(title)}</text>')
    for i, panel in enumerate(panels):
        y0 = top + 12 + i * (panel_height + gap)
        last = i == len(panels) - 1
        _render_panel(panel, left, y0, plot_w, panel_height, xlabel if last else "", out)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def line_chart(series, title="", xlabel="", ylabel="", width=800, height=300) -> str:
    """Single-panel chart from ``[(x, y, label), ...]``."""
    panel = Panel(ylabel=ylabel)
    for x, y, label in series:
        panel.add(x, y, label)
    return render([panel], title=title, xlabel=xlabel, width=width, panel_height=height - 100)
