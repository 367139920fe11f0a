"""Fast-greedy (Clauset-Newman-Moore) modularity communities.

Modularity of a partition of a graph with total edge weight W is

    Q = sum_c [ W_c / W - (S_c / 2W)^2 ]

with W_c the weight inside community c and S_c the sum of its weighted
degrees. With integer weights, 4W^2 * Q is an integer, so the greedy merge
order, its tie-breaking and the choice of the best cut are all computed
exactly.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import EdgelessGraphError, PartitionError
from .graph import CooccurrenceGraph


@dataclass(frozen=True)
class Merge:
    a: str  # representative (smallest member) of the first community
    b: str
    q: Fraction  # modularity after this merge

    @property
    def q_float(self) -> float:
        return float(self.q)


@dataclass(frozen=True)
class Dendrogram:
    leaves: tuple[str, ...]
    merges: tuple[Merge, ...]
    q_initial: Fraction
    weighted: bool = True

    @property
    def q_values(self) -> list[Fraction]:
        return [self.q_initial] + [m.q for m in self.merges]


@dataclass(frozen=True)
class CommunityPartition:
    assignment: dict[str, int]
    q: float

    @property
    def n_communities(self) -> int:
        return len(set(self.assignment.values()))

    def communities(self) -> list[list[str]]:
        groups = defaultdict(list)
        for tag, cid in self.assignment.items():
            groups[cid].append(tag)
        return [sorted(groups[c]) for c in sorted(groups)]


def _weights(g, weighted):
    return {e: (w if weighted else 1) for e, w in g.edges.items()}


def _as_assignment(partition) -> dict[str, object]:
    if isinstance(partition, CommunityPartition):
        return partition.assignment
    if isinstance(partition, Mapping):
        return dict(partition)
    assignment = {}
    for cid, group in enumerate(partition):
        for tag in group:
            if tag in assignment:
                raise PartitionError(f"vertex {tag!r} appears in two communities")
            assignment[tag] = cid
    return assignment


def modularity_exact(g: CooccurrenceGraph, partition, weighted: bool = True) -> Fraction:
    assignment = _as_assignment(partition)
    missing = set(g.vertices) - set(assignment)
    extra = set(assignment) - set(g.vertices)
    if missing or extra:
        raise PartitionError(
            f"partition does not match graph vertices (missing {sorted(missing)}, extra {sorted(extra)})"
        )
    weights = _weights(g, weighted)
    total = sum(weights.values())
    if total == 0:
        raise EdgelessGraphError("modularity is undefined on a graph without edges")
    inside = defaultdict(int)
    strength = defaultdict(int)
    for (u, v), w in weights.items():
        cu, cv = assignment[u], assignment[v]
        strength[cu] += w
        strength[cv] += w
        if cu == cv:
            inside[cu] += w
    num = sum(4 * total * inside[c] - strength[c] ** 2 for c in set(strength) | set(inside))
    return Fraction(num, 4 * total * total)


def modularity(g: CooccurrenceGraph, partition, weighted: bool = True) -> float:
    """Weighted modularity Q of ``partition`` (tag->id map, CommunityPartition
    or an iterable of tag groups)."""
    return float(modularity_exact(g, partition, weighted))


def fast_greedy(g: CooccurrenceGraph, weighted: bool = True) -> Dendrogram:
    """Agglomerate singleton communities by largest modularity gain.

    Only adjacent communities are candidates, so connected components are
    never joined. Equal gains go to the lexicographically smallest pair of
    community representatives (each community is represented by its
    smallest tag). Candidate gains live in one max-heap with lazy
    invalidation through per-community version counters.
    """
    weights = _weights(g, weighted)
    total = sum(weights.values())
    if total == 0:
        raise EdgelessGraphError("fast_greedy needs a graph with at least one edge")
    two_w = 2 * total

    links: dict[str, dict[str, int]] = {v: {} for v in g.nodes}
    strength = {v: 0 for v in g.nodes}
    for (u, v), w in weights.items():
        links[u][v] = w
        links[v][u] = w
        strength[u] += w
        strength[v] += w
    version = {v: 0 for v in g.nodes}
    # communities are keyed by their representative

    def gain(c, d):
        # (4W^2) * dQ / 2
        return two_w * links[c][d] - strength[c] * strength[d]

    heap = []

    def push(c, d):
        lo, hi = (c, d) if c < d else (d, c)
        heapq.heappush(heap, (-gain(lo, hi), lo, hi, version[lo], version[hi]))

    for (u, v) in sorted(weights):
        push(u, v)

    q_num = -sum(s * s for s in strength.values())
    denom = 4 * total * total
    q_initial = Fraction(q_num, denom)
    merges = []
    while heap:
        neg, lo, hi, vlo, vhi = heapq.heappop(heap)
        if version.get(lo) != vlo or version.get(hi) != vhi:
            continue
        q_num += -2 * neg
        merges.append(Merge(lo, hi, Fraction(q_num, denom)))
        # hi is absorbed into lo (lo < hi stays the representative)
        for x, w in links.pop(hi).items():
            if x == lo:
                continue
            links[lo][x] = links[lo].get(x, 0) + w
            links[x][lo] = links[lo][x]
            del links[x][hi]
        del links[lo][hi]
        strength[lo] += strength.pop(hi)
        del version[hi]
        version[lo] += 1
        for x in sorted(links[lo]):
            push(lo, x)
    return Dendrogram(leaves=g.nodes, merges=tuple(merges), q_initial=q_initial, weighted=weighted)


def _number(groups: Mapping[str, list[str]]) -> dict[str, int]:
    ordered = sorted(groups.values(), key=lambda members: (-len(members), min(members)))
    return {tag: cid for cid, members in enumerate(ordered) for tag in members}


def partition_at(d: Dendrogram, step: int) -> dict[str, int]:
    """Assignment after the first ``step`` merges; ids by size then smallest tag."""
    parent = {v: v for v in d.leaves}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for m in d.merges[:step]:
        ra, rb = find(m.a), find(m.b)
        lo, hi = (ra, rb) if ra < rb else (rb, ra)
        parent[hi] = lo
    groups = defaultdict(list)
    for v in d.leaves:
        groups[find(v)].append(v)
    return _number(groups)


def best_partition(d: Dendrogram) -> CommunityPartition:
    """Cut the dendrogram at its maximal-Q step (earliest on ties)."""
    qs = d.q_values
    step = max(range(len(qs)), key=lambda i: (qs[i], -i))
    return CommunityPartition(assignment=partition_at(d, step), q=float(qs[step]))


def detect_communities(g: CooccurrenceGraph, weighted: bool = True) -> CommunityPartition:
    return best_partition(fast_greedy(g, weighted))


@dataclass(frozen=True)
class CommunitySummary:
    community: int
    size: int
    top: list[tuple[str, float]]


def community_summary(partition: CommunityPartition, centrality, top_k: int = 10) -> list[CommunitySummary]:
    """Top-``top_k`` tags of each community by a centrality table.

    Communities are listed largest first; tags by descending score with
    ties broken by tag.
    """
    scores = centrality.scores if hasattr(centrality, "scores") else centrality
    missing = set(partition.assignment) - set(scores)
    if missing:
        raise PartitionError(f"centrality table lacks partitioned vertices {sorted(missing)[:10]}")
    if top_k < 0:
        raise PartitionError("top_k must be >= 0")
    groups = defaultdict(list)
    for tag, cid in partition.assignment.items():
        groups[cid].append(tag)
    order = sorted(groups, key=lambda c: (-len(groups[c]), c))
    out = []
    for cid in order:
        ranked = sorted(groups[cid], key=lambda t: (-scores[t], t))[:top_k]
        out.append(CommunitySummary(cid, len(groups[cid]), [(t, float(scores[t])) for t in ranked]))
    return out
