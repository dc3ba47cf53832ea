"""Minimal standalone SVG line charts for numeric tables."""

from __future__ import annotations

import math
from numbers import Real
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 400
MARGIN = 60


def _num(v, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (Real, str)):
        raise ValueError(f"non-numeric {what}: {v!r}")
    try:
        f = float(v)
    except ValueError:
        raise ValueError(f"non-numeric {what}: {v!r}") from None
    if math.isnan(f):
        raise ValueError(f"non-numeric {what}: {v!r}")
    return f


def emit_svg(rows: Sequence[Sequence], title: str = "", xlabel: str = "x", ylabel: str = "y",
             log_y: bool = False) -> str:
    """Polyline through ``(x, y)`` rows.  ``log_y`` plots ``log10 y`` (y must be positive)."""
    if len(rows) < 2:
        raise ValueError("need at least two rows to draw a line")
    pts = []
    for r in rows:
        x, y = _num(r[0], "x value"), _num(r[1], "y value")
        if log_y:
            if y <= 0:
                raise ValueError(f"log axis needs positive values, got {y}")
            y = math.log10(y)
        if math.isinf(x) or math.isinf(y):
            raise ValueError("infinite value in table")
        pts.append((x, y))
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    w, h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(x):
        return MARGIN + (x - x0) / (x1 - x0) * w

    def sy(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * h

    poly = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
    ylab = f"log10 {ylabel}" if log_y else ylabel
    ticks = []
    for v, label in ((x0, x0), (x1, x1)):
        ticks.append(f'<text x="{sx(v):.2f}" y="{HEIGHT - MARGIN + 18}" text-anchor="middle" '
                     f'font-size="11">{label:g}</text>')
    for v in (y0, y1):
        ticks.append(f'<text x="{MARGIN - 6}" y="{sy(v):.2f}" text-anchor="end" '
                     f'font-size="11">{v:.4g}</text>')
    return "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        *ticks,
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="15" y="{HEIGHT / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {HEIGHT / 2})">{escape(ylab)}</text>',
        f'<polyline points="{poly}" fill="none" stroke="#1f5fa8" stroke-width="2"/>',
        "</svg>",
        "",
    ])
