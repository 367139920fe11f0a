import json
import random
from pathlib import Path

import pytest

from tagnet.graph import CooccurrenceGraph, VertexMeta, edge_key

DATA = Path(__file__).resolve().parent / "data"


def make_graph(edges, isolated=(), query=()):
    """Graph from ``[(u, v, w), ...]`` (or ``(u, v)`` with weight 1)."""
    weights = {}
    for e in edges:
        u, v = e[0], e[1]
        w = e[2] if len(e) > 2 else 1
        weights[edge_key(u, v)] = weights.get(edge_key(u, v), 0) + w
    freq = {t: 0 for t in isolated}
    for (u, v), w in weights.items():
        freq[u] = max(freq.get(u, 0), w)
        freq[v] = max(freq.get(v, 0), w)
    vertices = {t: VertexMeta(max(f, 1), t in query) for t, f in sorted(freq.items())}
    return CooccurrenceGraph(vertices, dict(sorted(weights.items())), post_count=0)


def random_graph(rng, n, p=0.3, max_w=5, connected=False, names=None):
    names = names or [f"v{i:02d}" for i in range(n)]
    edges = {}
    if connected:
        order = names[:]
        rng.shuffle(order)
        for i in range(1, n):
            edges[edge_key(order[i], order[rng.randrange(i)])] = rng.randint(1, max_w)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.setdefault(edge_key(names[i], names[j]), rng.randint(1, max_w))
    return make_graph([(u, v, w) for (u, v), w in edges.items()], isolated=names)


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture
def two_triangles():
    return make_graph([("a", "b"), ("a", "c"), ("b", "c"), ("c", "d"), ("d", "e"), ("d", "f"), ("e", "f")])
