"""Force-directed layout and static SVG rendering of hashtag networks.

The layout uses only IEEE basic arithmetic and ``math.sqrt`` on Python
floats, with initial positions from ``random.Random(seed)``, so results
are identical on every platform for a given graph, iteration count and
seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from xml.sax.saxutils import escape, quoteattr

from .errors import AttributeMismatchError, InputError, PartitionError
from .export import community_color
from .graph import CooccurrenceGraph

_MIN_DIST = 1e-6


@dataclass(frozen=True)
class LayoutResult:
    positions: dict[str, tuple[float, float]]
    seed: int
    iterations: int


def layout_force(g: CooccurrenceGraph, iterations: int = 500, seed: int = 0) -> LayoutResult:
    """Fruchterman-Reingold layout in the unit square.

    Attraction along an edge is scaled by its weight relative to the
    heaviest edge. The temperature cools linearly to zero and the final
    positions are rescaled (aspect preserved) into [0, 1]^2.
    """
    nodes = g.nodes
    n = len(nodes)
    if n == 0:
        raise InputError("cannot lay out an empty graph")
    if iterations < 0:
        raise InputError("iterations must be >= 0")
    if n == 1:
        return LayoutResult({nodes[0]: (0.5, 0.5)}, seed, iterations)

    rng = random.Random(seed)
    xs = [rng.random() for _ in range(n)]
    ys = [rng.random() for _ in range(n)]
    idx = g.index
    max_w = max(g.edges.values(), default=1)
    springs = [(idx[u], idx[v], w / max_w) for (u, v), w in sorted(g.edges.items())]

    k = math.sqrt(1.0 / n)
    k2 = k * k
    temp = 0.1
    cooling = temp / (iterations + 1)
    for _ in range(iterations):
        dx_acc = [0.0] * n
        dy_acc = [0.0] * n
        for i in range(n):
            xi, yi = xs[i], ys[i]
            for j in range(i + 1, n):
                dx = xi - xs[j]
                dy = yi - ys[j]
                d = math.sqrt(dx * dx + dy * dy)
                if d < _MIN_DIST:
                    # coincident points: push apart along a fixed diagonal
                    dx, dy, d = _MIN_DIST, _MIN_DIST, _MIN_DIST * math.sqrt(2.0)
                f = k2 / (d * d)
                dx_acc[i] += dx * f
                dy_acc[i] += dy * f
                dx_acc[j] -= dx * f
                dy_acc[j] -= dy * f
        for i, j, w in springs:
            dx = xs[i] - xs[j]
            dy = ys[i] - ys[j]
            d = math.sqrt(dx * dx + dy * dy)
            f = w * d / k  # (w d^2 / k) along the unit vector
            dx_acc[i] -= dx * f
            dy_acc[i] -= dy * f
            dx_acc[j] += dx * f
            dy_acc[j] += dy * f
        for i in range(n):
            length = math.sqrt(dx_acc[i] * dx_acc[i] + dy_acc[i] * dy_acc[i])
            if length > 0:
                step = min(length, temp) / length
                xs[i] = min(1.0, max(0.0, xs[i] + dx_acc[i] * step))
                ys[i] = min(1.0, max(0.0, ys[i] + dy_acc[i] * step))
        temp -= cooling

    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0)
    if span == 0:
        positions = {t: (0.5, 0.5) for t in nodes}
    else:
        ox = (1.0 - (x1 - x0) / span) / 2.0
        oy = (1.0 - (y1 - y0) / span) / 2.0
        positions = {
            t: ((xs[i] - x0) / span + ox, (ys[i] - y0) / span + oy) for i, t in enumerate(nodes)
        }
    return LayoutResult(positions, seed, iterations)


def _f(x: float) -> str:
    return f"{x:.2f}"


def render_svg(
    g: CooccurrenceGraph,
    layout: LayoutResult,
    partition=None,
    size_by=None,
    *,
    size: int = 800,
    margin: int = 60,
    min_radius: float = 4.0,
    max_radius: float = 18.0,
    label_top_k: int = 30,
    title: str | None = None,
) -> str:
    """SVG 1.1 network plot.

    Circle radius is linear in the ``size_by`` score between ``min_radius``
    and ``max_radius``; fill colour follows the community; the ``label_top_k``
    highest-scoring tags are labelled (by frequency when no scores given).
    """
    pos = layout.positions
    missing = set(g.vertices) - set(pos)
    if missing:
        raise InputError(f"layout lacks vertices {sorted(missing)[:5]}")
    scores = None
    if size_by is not None:
        scores = size_by.scores if hasattr(size_by, "scores") else dict(size_by)
        missing = set(g.vertices) - set(scores)
        if missing:
            raise AttributeMismatchError(f"size_by lacks vertices {sorted(missing)[:5]}")
    assignment = None
    if partition is not None:
        assignment = getattr(partition, "assignment", partition)
        missing = set(g.vertices) - set(assignment)
        if missing:
            raise PartitionError(f"partition lacks vertices {sorted(missing)[:5]}")

    inner = size - 2 * margin

    def xy(tag):
        x, y = pos[tag]
        return margin + x * inner, margin + y * inner

    if scores is not None:
        values = [scores[t] for t in g.nodes]
        lo, hi = (min(values), max(values)) if values else (0.0, 0.0)
    radius = {}
    for t in g.nodes:
        if scores is None:
            radius[t] = min_radius
        elif hi > lo:
            radius[t] = min_radius + (scores[t] - lo) / (hi - lo) * (max_radius - min_radius)
        else:
            radius[t] = (min_radius + max_radius) / 2.0

    if scores is not None:
        rank_key = lambda t: (-scores[t], t)  # noqa: E731
    else:
        rank_key = lambda t: (-g.vertices[t].frequency, t)  # noqa: E731
    labelled = sorted(g.nodes, key=rank_key)[:max(label_top_k, 0)]

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" '
        f'height="{size}" viewBox="0 0 {size} {size}">',
        '<rect width="100%" height="100%" fill="#ffffff"/>',
    ]
    if title:
        out.append(
            f'<text x="{size / 2:.2f}" y="{margin / 2:.2f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{escape(title)}</text>'
        )
    max_w = max(g.edges.values(), default=1)
    out.append('<g id="edges" stroke="#999999" stroke-opacity="0.5">')
    for (u, v), w in sorted(g.edges.items()):
        (x1, y1), (x2, y2) = xy(u), xy(v)
        out.append(
            f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke-width="{_f(0.5 + 2.5 * w / max_w)}"/>'
        )
    out.append("</g>")
    out.append('<g id="nodes" stroke="#ffffff" stroke-width="0.8">')
    for t in sorted(g.nodes, key=lambda t: (-radius[t], t)):
        x, y = xy(t)
        fill = community_color(assignment[t]) if assignment is not None else "#4c72b0"
        out.append(
            f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(radius[t])}" fill="{fill}">'
            f"<title>{escape(t)}</title></circle>"
        )
    out.append("</g>")
    out.append('<g id="labels" font-family="sans-serif" font-size="11" fill="#222222">')
    for t in sorted(labelled):
        x, y = xy(t)
        out.append(f'<text x="{_f(x + radius[t] + 2)}" y="{_f(y + 4)}" data-tag={quoteattr(t)}>{escape(t)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
