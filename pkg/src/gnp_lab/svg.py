"""Tiny SVG writer: polylines, circles and text in data coordinates."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


def _num(v: float) -> str:
    return f"{float(v):.6g}"


@dataclass
class Figure:
    width: int = 480
    height: int = 480
    margin: int = 24
    items: list = field(default_factory=list)

    def polyline(self, pts, color: str = PALETTE[0], closed: bool = False, width: float = 1.2) -> "Figure":
        pts = np.asarray(pts, dtype=float)
        if pts.ndim == 2 and len(pts) >= 2:
            self.items.append(("line", pts, color, closed, width))
        return self

    def points(self, pts, color: str = PALETTE[1], r: float = 1.5) -> "Figure":
        for p in np.atleast_2d(np.asarray(pts, dtype=float)):
            self.items.append(("dot", p, color, r))
        return self

    def circle(self, center, radius: float, color: str = PALETTE[2]) -> "Figure":
        self.items.append(("circle", np.asarray(center, float), color, float(radius)))
        return self

    def text(self, pos, label: str, color: str = "#000") -> "Figure":
        self.items.append(("text", np.asarray(pos, float), color, str(label)))
        return self

    def _extent(self):
        pts = []
        for it in self.items:
            if it[0] == "line":
                pts.append(it[1])
            elif it[0] == "circle":
                c, r = it[1], it[3]
                pts.append(np.array([c - r, c + r]))
            else:
                pts.append(it[1][None, :])
        if not pts:
            return np.zeros(2), np.ones(2)
        allp = np.vstack(pts)
        lo, hi = allp.min(axis=0), allp.max(axis=0)
        span = np.where(hi - lo > 0, hi - lo, 1.0)
        return lo, lo + span

    def render(self, equal_aspect: bool = True) -> str:
        lo, hi = self._extent()
        inner = np.array([self.width, self.height], float) - 2 * self.margin
        sx, sy = inner / (hi - lo)
        if equal_aspect:
            sx = sy = min(sx, sy)

        def tx(p):
            return self.margin + (p[..., 0] - lo[0]) * sx, self.height - self.margin - (p[..., 1] - lo[1]) * sy

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
               f'viewBox="0 0 {self.width} {self.height}">',
               '<rect width="100%" height="100%" fill="white"/>']
        for it in self.items:
            kind = it[0]
            if kind == "line":
                x, y = tx(it[1])
                pts = " ".join(f"{_num(a)},{_num(b)}" for a, b in zip(x, y))
                tag = "polygon" if it[3] else "polyline"
                out.append(f'<{tag} points="{pts}" fill="none" stroke="{it[2]}" stroke-width="{it[4]}"/>')
            elif kind == "dot":
                x, y = tx(it[1])
                out.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="{it[3]}" fill="{it[2]}"/>')
            elif kind == "circle":
                x, y = tx(it[1])
                out.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="{_num(it[3] * sx)}" fill="none" stroke="{it[2]}"/>')
            else:
                x, y = tx(it[1])
                label = it[3].replace("&", "&amp;").replace("<", "&lt;")
                out.append(f'<text x="{_num(x)}" y="{_num(y)}" font-size="11" fill="{it[2]}">{label}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path, equal_aspect: bool = True) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render(equal_aspect))


def draw_boundary(fig: Figure, boundary, color: str = PALETTE[0]) -> Figure:
    """Draw each chain of a sampled boundary as its own polyline."""
    pts = boundary.points
    if pts.size == 0:
        return fig
    if pts.shape[1] == 1:
        return fig.points(np.column_stack([pts[:, 0], np.zeros(len(pts))]), color)
    chains = getattr(boundary, "chains", None) or [(np.arange(len(pts)), True)]
    for idx, closed in chains:
        fig.polyline(pts[np.asarray(idx)], color, closed)
    return fig


def draw_convex(fig: Figure, C, color: str = PALETTE[2]) -> Figure:
    from . import convex as cx

    if isinstance(C, cx.Ball):
        return fig.circle(C.center, C.radius, color)
    if isinstance(C, cx.Segment):
        return fig.polyline(np.array([C.a, C.b]), color, width=2.0)
    return fig.polyline(C.vertices, color, closed=True)
