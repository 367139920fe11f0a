"""Vertex centrality measures on co-occurrence graphs.

Power-iteration measures (eigenvector, hub, authority) are max-normalized
so the top vertex scores 1.0; PageRank sums to 1. Path-based measures use
hop counts or, in ``inverse_weight`` mode, edge length ``1/weight`` so that
tags that co-occur often sit close together. Weighted lengths are kept as
exact fractions so equal-length shortest paths are recognised exactly.
"""

from __future__ import annotations

import heapq
import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ConvergenceError, EdgelessGraphError, EmptyGraphError, InputError
from .graph import CooccurrenceGraph

logger = logging.getLogger(__name__)

MEASURES = (
    "degree",
    "weighted_degree",
    "betweenness",
    "closeness",
    "eigenvector",
    "hub",
    "authority",
    "pagerank",
)
DISTANCE_MODES = ("hop", "inverse_weight")


@dataclass(frozen=True)
class CentralityTable:
    measure: str
    scores: dict[str, float]
    params: dict = field(default_factory=dict)

    def __getitem__(self, tag):
        return self.scores[tag]

    def ranked(self) -> list[tuple[str, float]]:
        return sorted(self.scores.items(), key=lambda kv: (-kv[1], kv[0]))


def _table(g, measure, values, **params):
    return CentralityTable(measure, {t: float(values[i]) for i, t in enumerate(g.nodes)}, params)


def degree(g: CooccurrenceGraph, weighted: bool = False) -> CentralityTable:
    if weighted:
        scores = {t: float(sum(g.neighbors(t).values())) for t in g.nodes}
        return CentralityTable("weighted_degree", scores, {})
    return CentralityTable("degree", {t: float(len(g.neighbors(t))) for t in g.nodes}, {})


def _require_edges(g, measure):
    if len(g) == 0:
        raise EmptyGraphError(f"{measure} centrality needs a non-empty graph")
    if g.n_edges == 0:
        raise EdgelessGraphError(f"{measure} centrality needs at least one edge")


def _shift(g, w, n_active):
    # half the mean weighted degree of non-isolated vertices: scales with the
    # weights and separates the dominant eigenvalue from its bipartite mirror
    return float(w.sum()) / n_active / 2.0


def _operator(g):
    src, dst, w = g.edge_arrays()
    n = len(g.nodes)
    n_active = int(np.count_nonzero(np.bincount(src, minlength=n)))
    c = _shift(g, w, n_active)

    def apply(x):
        return np.bincount(src, weights=w * x[dst], minlength=n) + c * x

    return apply, c


def eigenvector(g: CooccurrenceGraph, tol: float = 1e-10, max_iter: int = 1000) -> CentralityTable:
    """Dominant eigenvector of the weighted adjacency matrix.

    Power iteration starts from the all-ones vector and runs on ``A + cI``
    (same eigenvectors, no oscillation on bipartite graphs). Convergence is
    the L-infinity change between max-normalized iterates.
    """
    _require_edges(g, "eigenvector")
    disconnected = not g.is_connected()
    if disconnected:
        logger.warning(
            "eigenvector centrality on a disconnected graph; consider largest_component first"
        )
    apply, c = _operator(g)
    x = np.ones(len(g.nodes))
    residual = np.inf
    for it in range(1, max_iter + 1):
        y = apply(x)
        y /= y.max()
        residual = float(np.abs(y - x).max())
        x = y
        if residual < tol:
            return _table(g, "eigenvector", x, tol=tol, max_iter=max_iter, iterations=it,
                          residual=residual, shift=c, disconnected=disconnected)
    raise ConvergenceError("eigenvector", max_iter, residual, dict(zip(g.nodes, x.tolist())))


def hits(g: CooccurrenceGraph, tol: float = 1e-10, max_iter: int = 1000):
    """Kleinberg hub and authority scores as ``(hub, authority)`` tables.

    Alternates ``a <- A^T h`` and ``h <- A a`` with the same diagonal shift
    as ``eigenvector``. For the symmetric adjacency of an undirected graph
    both vectors converge to the eigenvector centrality.
    """
    _require_edges(g, "hits")
    apply, c = _operator(g)  # A is symmetric, so A^T x == A x
    hub = np.ones(len(g.nodes))
    auth = np.ones(len(g.nodes))
    residual = np.inf
    for it in range(1, max_iter + 1):
        new_auth = apply(hub)
        new_auth /= new_auth.max()
        new_hub = apply(new_auth)
        new_hub /= new_hub.max()
        residual = float(max(np.abs(new_hub - hub).max(), np.abs(new_auth - auth).max()))
        hub, auth = new_hub, new_auth
        if residual < tol:
            params = dict(tol=tol, max_iter=max_iter, iterations=it, residual=residual, shift=c)
            return _table(g, "hub", hub, **params), _table(g, "authority", auth, **params)
    raise ConvergenceError("hits", max_iter, residual, dict(zip(g.nodes, hub.tolist())))


def pagerank(
    g: CooccurrenceGraph, damping: float = 0.85, tol: float = 1e-10, max_iter: int = 1000
) -> CentralityTable:
    """Stationary distribution of the damped weighted random walk.

    Each undirected edge is two arcs; a walker leaves a vertex along an
    arc with probability proportional to its weight. Isolated vertices
    have no arcs, so their mass is spread uniformly like the teleport.
    """
    n = len(g.nodes)
    if n == 0:
        raise EmptyGraphError("pagerank needs a non-empty graph")
    if not 0 <= damping < 1:
        raise InputError("damping must lie in [0, 1)")
    src, dst, w = g.edge_arrays()
    out = np.bincount(src, weights=w, minlength=n)
    dangling = out == 0
    share = np.divide(w, out[src], out=np.zeros_like(w), where=out[src] > 0)
    x = np.full(n, 1.0 / n)
    residual = np.inf
    for it in range(1, max_iter + 1):
        flow = np.bincount(dst, weights=share * x[src], minlength=n)
        y = damping * (flow + x[dangling].sum() / n) + (1.0 - damping) / n
        y /= y.sum()
        residual = float(np.abs(y - x).sum())
        x = y
        if residual < tol:
            return _table(g, "pagerank", x, damping=damping, tol=tol, max_iter=max_iter,
                          iterations=it, residual=residual)
    raise ConvergenceError("pagerank", max_iter, residual, dict(zip(g.nodes, x.tolist())))


def _check_mode(mode):
    if mode not in DISTANCE_MODES:
        raise InputError(f"distance_mode must be one of {DISTANCE_MODES}, got {mode!r}")


def _shortest_paths(g, source, mode):
    """Single-source shortest paths.

    Returns ``(order, dist, sigma, preds)`` with ``order`` the vertices in
    non-decreasing distance, ``sigma`` the shortest-path counts and
    ``preds`` the shortest-path predecessors.
    """
    dist = {source: 0}
    sigma = {source: 1}
    preds = {source: []}
    order = []
    if mode == "hop":
        queue = deque([source])
        while queue:
            u = queue.popleft()
            order.append(u)
            for v in sorted(g.neighbors(u)):
                if v not in dist:
                    dist[v] = dist[u] + 1
                    sigma[v] = 0
                    preds[v] = []
                    queue.append(v)
                if dist[v] == dist[u] + 1:
                    sigma[v] += sigma[u]
                    preds[v].append(u)
        return order, dist, sigma, preds

    done = set()
    heap = [(Fraction(0), source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        order.append(u)
        for v, wt in sorted(g.neighbors(u).items()):
            alt = d + Fraction(1, wt)
            if v not in dist or alt < dist[v]:
                dist[v] = alt
                sigma[v] = sigma[u]
                preds[v] = [u]
                heapq.heappush(heap, (alt, v))
            elif alt == dist[v] and v not in done:
                sigma[v] += sigma[u]
                preds[v].append(u)
    return order, dist, sigma, preds


def closeness(g: CooccurrenceGraph, distance_mode: str = "inverse_weight") -> CentralityTable:
    """(reachable - 1) / sum of distances, within each vertex's component."""
    _check_mode(distance_mode)
    scores = {}
    for v in g.nodes:
        _, dist, _, _ = _shortest_paths(g, v, distance_mode)
        total = sum(dist.values())
        scores[v] = float(Fraction(len(dist) - 1) / total) if total else 0.0
    return CentralityTable("closeness", scores, {"distance_mode": distance_mode})


def betweenness(g: CooccurrenceGraph, distance_mode: str = "inverse_weight") -> CentralityTable:
    """Exact Brandes betweenness; each unordered vertex pair counts once."""
    _check_mode(distance_mode)
    acc = {v: Fraction(0) for v in g.nodes}
    for s in g.nodes:
        order, _, sigma, preds = _shortest_paths(g, s, distance_mode)
        delta = {v: Fraction(0) for v in order}
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += Fraction(sigma[v], sigma[w]) * (1 + delta[w])
            if w != s:
                acc[w] += delta[w]
    scores = {v: float(acc[v] / 2) for v in g.nodes}
    return CentralityTable("betweenness", scores, {"distance_mode": distance_mode})


@dataclass(frozen=True)
class CentralityReport:
    measures: tuple[str, ...]
    tables: dict[str, CentralityTable]
    rows: list[tuple[str, dict[str, float]]]
    sort_measure: str


def parse_measures(names) -> tuple[str, ...]:
    if isinstance(names, str):
        names = [n for n in names.replace(",", " ").split() if n]
    names = set(names)
    if "all" in names:
        names = set(MEASURES)
    if not names:
        raise InputError("no measures selected")
    unknown = names - set(MEASURES)
    if unknown:
        raise InputError(f"unknown measure(s) {sorted(unknown)}; choose from {list(MEASURES)}")
    return tuple(m for m in MEASURES if m in names)


def centrality_report(
    g: CooccurrenceGraph,
    measures,
    *,
    distance_mode: str = "inverse_weight",
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> CentralityReport:
    """Run several measures and join them into rows keyed by tag.

    Rows are ordered by eigenvector score (descending, ties by tag) when it
    was requested, otherwise by the first requested measure.
    """
    selected = parse_measures(measures)
    tables = {}
    for m in selected:
        if m in tables:
            continue
        if m == "degree":
            tables[m] = degree(g)
        elif m == "weighted_degree":
            tables[m] = degree(g, weighted=True)
        elif m == "betweenness":
            tables[m] = betweenness(g, distance_mode)
        elif m == "closeness":
            tables[m] = closeness(g, distance_mode)
        elif m == "eigenvector":
            tables[m] = eigenvector(g, tol, max_iter)
        elif m in ("hub", "authority"):
            hub, auth = hits(g, tol, max_iter)
            tables["hub"], tables["authority"] = hub, auth
        elif m == "pagerank":
            tables[m] = pagerank(g, damping, tol, max_iter)
    tables = {m: tables[m] for m in selected}
    key = "eigenvector" if "eigenvector" in tables else selected[0]
    order = [t for t, _ in tables[key].ranked()]
    rows = [(t, {m: tables[m].scores[t] for m in selected}) for t in order]
    return CentralityReport(measures=selected, tables=tables, rows=rows, sort_measure=key)
