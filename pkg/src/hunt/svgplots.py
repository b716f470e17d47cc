"""Deterministic in-process SVG bar charts for explanation artifacts."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

from .errors import PlotRenderError

VIEW_W, VIEW_H = 640, 360
MARGIN_LEFT = 220
MARGIN_RIGHT = 70
MARGIN_TOP = 44
BAR_GAP = 6

SUPPORT_COLOR = "#c0392b"
OPPOSE_COLOR = "#2980b9"


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    title: str
    bars: tuple  # (label, value, direction)
    svg: bytes
    digest: str

    def to_json(self):
        return {"kind": self.kind, "title": self.title,
                "bars": [[l, v, d] for l, v, d in self.bars],
                "digest": self.digest}


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))


def render_bar_plot(title: str, bars, kind: str = "horizontal bar") -> PlotSpec:
    """Render labeled horizontal bars around a signed center axis."""
    bars = tuple((str(l), float(v), str(d)) for l, v, d in bars)
    for _, v, _ in bars:
        if not math.isfinite(v):
            raise PlotRenderError(f"non-finite bar value in {title!r}")

    span = max((abs(v) for _, v, _ in bars), default=1.0) or 1.0
    plot_w = VIEW_W - MARGIN_LEFT - MARGIN_RIGHT
    center = MARGIN_LEFT + plot_w / 2
    n = max(len(bars), 1)
    bar_h = min(26, (VIEW_H - MARGIN_TOP - 20 - BAR_GAP * n) / n)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="0 0 {VIEW_W} {VIEW_H}">',
        f'<rect x="0" y="0" width="{VIEW_W}" height="{VIEW_H}" fill="#ffffff"/>',
        f'<text x="{VIEW_W // 2}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15" fill="#222222">{_esc(title)}</text>',
        f'<line x1="{center:.2f}" y1="{MARGIN_TOP}" x2="{center:.2f}" '
        f'y2="{VIEW_H - 16}" stroke="#bbbbbb" stroke-width="1"/>',
    ]
    for i, (label, value, direction) in enumerate(bars):
        y = MARGIN_TOP + i * (bar_h + BAR_GAP)
        w = abs(value) / span * (plot_w / 2)
        x = center if value >= 0 else center - w
        color = SUPPORT_COLOR if direction == "supports" else OPPOSE_COLOR
        ty = y + bar_h / 2 + 4
        parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{bar_h:.2f}" '
            f'fill="{color}"/>')
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{ty:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" fill="#333333">'
            f'{_esc(label)}</text>')
        vx = x + w + 4 if value >= 0 else x - 4
        anchor = "start" if value >= 0 else "end"
        parts.append(
            f'<text x="{vx:.2f}" y="{ty:.2f}" text-anchor="{anchor}" '
            f'font-family="sans-serif" font-size="10" fill="#555555">'
            f'{value:+.4f}</text>')
    parts.append("</svg>")
    svg = "\n".join(parts).encode("utf-8")
    return PlotSpec(kind, title, bars, svg, hashlib.sha256(svg).hexdigest())
