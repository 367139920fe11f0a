"""Weighted undirected hashtag co-occurrence graph and its projections."""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class VertexMeta:
    frequency: int = 0
    is_query: bool = False


def edge_key(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class CooccurrenceGraph:
    """Immutable co-occurrence graph.

    ``edges`` maps a sorted vertex pair to the number of posts in which
    both tags appear. Use ``build_graph`` or ``from_parts`` to construct.
    """

    vertices: Mapping[str, VertexMeta]
    edges: Mapping[tuple[str, str], int]
    post_count: int = 0
    _adj: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        adj = {v: {} for v in self.vertices}
        for (u, v), w in self.edges.items():
            if u == v:
                raise InputError(f"self-loop on {u!r}")
            if not u < v:
                raise InputError(f"edge key {(u, v)} is not sorted")
            if u not in adj or v not in adj:
                raise InputError(f"edge {(u, v)} has an endpoint outside the vertex set")
            if w <= 0:
                raise InputError(f"edge {(u, v)} has non-positive weight {w}")
            adj[u][v] = w
            adj[v][u] = w
        object.__setattr__(self, "_adj", adj)

    @classmethod
    def from_parts(cls, vertices, edges, post_count=0) -> "CooccurrenceGraph":
        """Build from loose inputs: vertices as an iterable or tag->meta map,
        edges as (u, v, w) triples or a pair->weight map."""
        if isinstance(vertices, Mapping):
            verts = {
                t: m if isinstance(m, VertexMeta) else VertexMeta(**m)
                for t, m in vertices.items()
            }
        else:
            verts = None
            tags = list(vertices)
        if isinstance(edges, Mapping):
            items = [(u, v, w) for (u, v), w in edges.items()]
        else:
            items = [(e[0], e[1], e[2] if len(e) > 2 else 1) for e in edges]
        emap = {}
        for u, v, w in items:
            emap[edge_key(u, v)] = emap.get(edge_key(u, v), 0) + w
        if verts is None:
            # smallest frequency consistent with the incident edge weights
            heaviest = Counter()
            for (u, v), w in emap.items():
                heaviest[u] = max(heaviest[u], w)
                heaviest[v] = max(heaviest[v], w)
            verts = {t: VertexMeta(frequency=max(1, heaviest[t])) for t in set(tags) | set(heaviest)}
        return cls(vertices=dict(sorted(verts.items())), edges=dict(sorted(emap.items())),
                   post_count=post_count)

    def __eq__(self, other):
        if not isinstance(other, CooccurrenceGraph):
            return NotImplemented
        return (
            dict(self.vertices) == dict(other.vertices)
            and dict(self.edges) == dict(other.edges)
            and self.post_count == other.post_count
        )

    def __len__(self):
        return len(self.vertices)

    @cached_property
    def nodes(self) -> tuple[str, ...]:
        return tuple(sorted(self.vertices))

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    def neighbors(self, v: str) -> dict[str, int]:
        return self._adj[v]

    def weight(self, u: str, v: str) -> int:
        return self._adj[u].get(v, 0)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def total_weight(self) -> int:
        return sum(self.edges.values())

    def edge_arrays(self, weighted: bool = True):
        """Directed (both ways) edge arrays ``(src, dst, w)`` over ``self.nodes`` order."""
        idx = self.index
        m = len(self.edges)
        src = np.empty(2 * m, dtype=np.intp)
        dst = np.empty(2 * m, dtype=np.intp)
        w = np.empty(2 * m, dtype=float)
        for k, ((u, v), wt) in enumerate(sorted(self.edges.items())):
            src[2 * k], dst[2 * k] = idx[u], idx[v]
            src[2 * k + 1], dst[2 * k + 1] = idx[v], idx[u]
            w[2 * k] = w[2 * k + 1] = wt if weighted else 1.0
        return src, dst, w

    def adjacency_matrix(self, weighted: bool = True) -> np.ndarray:
        n = len(self.nodes)
        a = np.zeros((n, n))
        src, dst, w = self.edge_arrays(weighted)
        a[src, dst] = w
        return a

    def subgraph(self, keep: Iterable[str], min_edge_weight: int = 1) -> "CooccurrenceGraph":
        keep = set(keep)
        verts = {t: m for t, m in self.vertices.items() if t in keep}
        edges = {
            (u, v): w for (u, v), w in self.edges.items()
            if u in keep and v in keep and w >= min_edge_weight
        }
        return CooccurrenceGraph(vertices=verts, edges=edges, post_count=self.post_count)

    def components(self) -> list[list[str]]:
        """Connected components, each sorted, in order of their smallest member."""
        seen = set()
        comps = []
        for start in self.nodes:
            if start in seen:
                continue
            seen.add(start)
            comp = [start]
            queue = deque([start])
            while queue:
                u = queue.popleft()
                for v in self._adj[u]:
                    if v not in seen:
                        seen.add(v)
                        comp.append(v)
                        queue.append(v)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1


def build_graph(posts, query_tags: Iterable[str] = ()) -> CooccurrenceGraph:
    """Co-occurrence graph of normalized posts.

    ``posts`` is a PostCollection or any iterable of tag sequences. Each
    post adds 1 to every unordered pair of its distinct tags and 1 to the
    frequency of each tag.
    """
    query = set(query_tags) | set(getattr(posts, "query", ()))
    tag_lists = [getattr(p, "hashtags", p) for p in posts]
    freq = Counter()
    pairs = Counter()
    for tags in tag_lists:
        distinct = sorted(set(tags))
        freq.update(distinct)
        pairs.update(combinations(distinct, 2))
    vertices = {t: VertexMeta(frequency=freq[t], is_query=t in query) for t in sorted(freq)}
    edges = dict(sorted(pairs.items()))
    return CooccurrenceGraph(vertices=vertices, edges=edges, post_count=len(tag_lists))


def project_top_n(g: CooccurrenceGraph, n: int, min_edge_weight: int = 1) -> CooccurrenceGraph:
    """Induced subgraph on the ``n`` most frequent tags, minus light edges."""
    if n < 1:
        raise InputError("top-n must be >= 1")
    if min_edge_weight < 1:
        raise InputError("min_edge_weight must be >= 1")
    ranked = sorted(g.vertices, key=lambda t: (-g.vertices[t].frequency, t))
    return g.subgraph(ranked[:n], min_edge_weight=min_edge_weight)


def largest_component(g: CooccurrenceGraph) -> CooccurrenceGraph:
    comps = g.components()
    if not comps:
        return g
    # components() is ordered by smallest member, so max() keeps the first on ties
    best = max(comps, key=len)
    return g.subgraph(best)


def exclude_tags(g: CooccurrenceGraph, tags: Iterable[str]) -> CooccurrenceGraph:
    drop = set(tags)
    return g.subgraph(t for t in g.vertices if t not in drop)


def graph_to_dict(g: CooccurrenceGraph) -> dict:
    return {
        "post_count": g.post_count,
        "vertices": [
            {"tag": t, "frequency": g.vertices[t].frequency, "is_query": g.vertices[t].is_query}
            for t in g.nodes
        ],
        "edges": [
            {"source": u, "target": v, "weight": w} for (u, v), w in sorted(g.edges.items())
        ],
    }


def graph_from_dict(data: dict) -> CooccurrenceGraph:
    try:
        verts = {
            d["tag"]: VertexMeta(frequency=int(d["frequency"]), is_query=bool(d.get("is_query", False)))
            for d in data["vertices"]
        }
        edges = {edge_key(d["source"], d["target"]): int(d["weight"]) for d in data["edges"]}
        return CooccurrenceGraph(
            vertices=dict(sorted(verts.items())),
            edges=dict(sorted(edges.items())),
            post_count=int(data.get("post_count", 0)),
        )
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed graph document: {exc}") from exc


def dumps_graph(g: CooccurrenceGraph) -> str:
    """Canonical JSON: sorted vertices and edges, stable bytes."""
    return json.dumps(graph_to_dict(g), indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def loads_graph(text: str) -> CooccurrenceGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"graph JSON is invalid: {exc}") from exc
    return graph_from_dict(data)
