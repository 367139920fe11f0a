import random
from fractions import Fraction

import pytest

from conftest import make_graph, random_graph
from tagnet.centrality import degree, eigenvector
from tagnet.community import (
    CommunityPartition,
    best_partition,
    community_summary,
    detect_communities,
    fast_greedy,
    modularity,
    modularity_exact,
    partition_at,
)
from tagnet.errors import EdgelessGraphError, PartitionError
from tagnet.graph import CooccurrenceGraph, edge_key


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def q_oracle(g, groups, weighted=True):
    """Q = 1/2W * sum_ij (A_ij - k_i k_j / 2W) delta(c_i, c_j), term by term."""
    comm = {t: i for i, grp in enumerate(groups) for t in grp}
    w = {e: (x if weighted else 1) for e, x in g.edges.items()}
    two_w = 2 * sum(w.values())
    k = {t: 0 for t in g.nodes}
    for (u, v), x in w.items():
        k[u] += x
        k[v] += x
    total = Fraction(0)
    for i in g.nodes:
        for j in g.nodes:
            if comm[i] == comm[j]:
                a = w.get(edge_key(i, j), 0) if i != j else 0
                total += Fraction(a) - Fraction(k[i] * k[j], two_w)
    return total / two_w


def exhaustive_best(g, weighted=True):
    return max(q_oracle(g, p, weighted) for p in set_partitions(list(g.nodes)))


def blocks(assignment):
    groups = {}
    for t, c in assignment.items():
        groups.setdefault(c, set()).add(t)
    return {frozenset(s) for s in groups.values()}


def complete(n):
    names = [f"k{i}" for i in range(n)]
    return make_graph([(u, v) for i, u in enumerate(names) for v in names[i + 1:]])


# -- modularity ---------------------------------------------------------------


def test_single_community_zero():
    rng = random.Random(31)
    for _ in range(20):
        g = random_graph(rng, rng.randint(2, 10), p=0.4, connected=True)
        assert modularity_exact(g, {t: 0 for t in g.nodes}) == 0


def test_two_triangles_q(two_triangles):
    q = modularity_exact(two_triangles, [["a", "b", "c"], ["d", "e", "f"]])
    assert q == Fraction(5, 14)
    assert modularity(two_triangles, [["a", "b", "c"], ["d", "e", "f"]]) == pytest.approx(0.35714, abs=1e-5)


def test_k3_singletons():
    assert modularity_exact(complete(3), [["k0"], ["k1"], ["k2"]]) == Fraction(-1, 3)


def test_modularity_matches_oracle():
    rng = random.Random(32)
    for _ in range(50):
        g = random_graph(rng, rng.randint(2, 8), p=0.4)
        if g.n_edges == 0:
            continue
        labels = {t: rng.randrange(3) for t in g.nodes}
        groups = [[t for t in g.nodes if labels[t] == c] for c in range(3)]
        groups = [grp for grp in groups if grp]
        for weighted in (True, False):
            assert modularity_exact(g, labels, weighted) == q_oracle(g, groups, weighted)


def test_modularity_errors(two_triangles):
    with pytest.raises(PartitionError):
        modularity(two_triangles, {"a": 0})
    with pytest.raises(PartitionError):
        modularity(two_triangles, {**{t: 0 for t in "abcdef"}, "zz": 1})
    with pytest.raises(PartitionError):
        modularity(two_triangles, [["a", "b"], ["b", "c", "d", "e", "f"]])
    with pytest.raises(EdgelessGraphError):
        modularity(make_graph([], isolated=["a"]), {"a": 0})


# -- fast greedy ----------------------------------------------------------------


def test_two_triangles_fast_greedy(two_triangles):
    d = fast_greedy(two_triangles)
    assert len(d.merges) == 5
    p = best_partition(d)
    assert blocks(p.assignment) == {frozenset("abc"), frozenset("def")}
    assert p.q == pytest.approx(5 / 14, abs=1e-12)
    assert Fraction(5, 14) == exhaustive_best(two_triangles)


def test_single_edge():
    g = make_graph([("a", "b")])
    d = fast_greedy(g)
    assert len(d.merges) == 1
    assert d.q_initial == Fraction(-1, 2) and d.merges[0].q == 0
    p = best_partition(d)
    assert p.n_communities == 1 and p.q == 0.0


def test_two_disjoint_edges():
    g = make_graph([("a", "b"), ("c", "d")])
    d = fast_greedy(g)
    assert len(d.merges) == 2
    p = best_partition(d)
    assert blocks(p.assignment) == {frozenset("ab"), frozenset("cd")}
    assert p.q == 0.5


def test_k5_one_community():
    p = detect_communities(complete(5))
    assert p.n_communities == 1
    assert exhaustive_best(complete(5)) == 0


def test_components_never_merge():
    rng = random.Random(33)
    for _ in range(30):
        g = random_graph(rng, rng.randint(2, 14), p=0.15)
        if g.n_edges == 0:
            continue
        d = fast_greedy(g)
        n_comp = len(g.components())
        assert len(d.merges) == len(g) - n_comp
        final = partition_at(d, len(d.merges))
        assert blocks(final) == {frozenset(c) for c in g.components()}
        assert best_partition(d).n_communities >= n_comp


def test_edgeless_rejected():
    with pytest.raises(EdgelessGraphError):
        fast_greedy(make_graph([], isolated=["a", "b"]))


def test_q_sequence_bounds_and_self_consistency():
    rng = random.Random(34)
    for _ in range(40):
        g = random_graph(rng, rng.randint(2, 16), p=0.3, max_w=6)
        if g.n_edges == 0:
            continue
        for weighted in (True, False):
            d = fast_greedy(g, weighted)
            assert all(Fraction(-1, 2) <= q <= 1 for q in d.q_values)
            for step in range(len(d.merges) + 1):
                assert modularity_exact(g, partition_at(d, step), weighted) == d.q_values[step]
            p = best_partition(d)
            assert abs(modularity(g, p, weighted) - p.q) <= 1e-12
            ids = sorted(set(p.assignment.values()))
            assert ids == list(range(len(ids)))


def test_greedy_never_beats_exhaustive():
    rng = random.Random(35)
    for _ in range(25):
        g = random_graph(rng, rng.randint(2, 8), p=0.4, max_w=4)
        if g.n_edges == 0:
            continue
        p = best_partition(fast_greedy(g))
        assert modularity_exact(g, p) <= exhaustive_best(g)


def test_planted_two_cliques_positive():
    rng = random.Random(36)
    for _ in range(15):
        k = rng.randint(3, 5)
        left = [f"l{i}" for i in range(k)]
        right = [f"r{i}" for i in range(k)]
        edges = [(u, v, rng.randint(2, 5)) for grp in (left, right)
                 for i, u in enumerate(grp) for v in grp[i + 1:]]
        edges.append((rng.choice(left), rng.choice(right), 1))
        g = make_graph(edges)
        p = detect_communities(g)
        assert p.q > 0
        assert blocks(p.assignment) == {frozenset(left), frozenset(right)}


def test_unweighted_toggle_ignores_weights():
    g = make_graph([("a", "b", 9), ("b", "c", 1), ("c", "d", 9), ("a", "d", 1)])
    unit = make_graph([("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")])
    assert fast_greedy(g, weighted=False).q_values == fast_greedy(unit).q_values
    assert blocks(detect_communities(g).assignment) == {frozenset("ab"), frozenset("cd")}


def _relabel(g, mapping):
    return CooccurrenceGraph(
        dict(sorted((mapping[t], m) for t, m in g.vertices.items())),
        dict(sorted((edge_key(mapping[u], mapping[v]), w) for (u, v), w in g.edges.items())),
    )


def test_relabel_invariance():
    rng = random.Random(37)
    for _ in range(30):
        g = random_graph(rng, rng.randint(3, 16), p=0.3, max_w=1000, connected=True)
        base = blocks(detect_communities(g).assignment)
        # order-preserving renaming keeps every tie-break identical
        same = {t: "x_" + t for t in g.nodes}
        assert blocks(detect_communities(_relabel(g, same)).assignment) == {
            frozenset(same[t] for t in b) for b in base
        }
        # with generic weights there are no gain ties, so any renaming works
        perm = list(g.nodes)
        rng.shuffle(perm)
        mapping = {a: "y_" + b for a, b in zip(g.nodes, perm)}
        assert blocks(detect_communities(_relabel(g, mapping)).assignment) == {
            frozenset(mapping[t] for t in b) for b in base
        }


def test_deterministic_tie_break():
    # a 4-cycle has equal gains everywhere; smallest representative pair wins
    g = make_graph([("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")])
    d = fast_greedy(g)
    assert (d.merges[0].a, d.merges[0].b) == ("a", "b")
    assert fast_greedy(g).merges == d.merges


# -- summaries ----------------------------------------------------------------


def test_summary_single_community():
    g = complete(4)
    p = CommunityPartition({t: 0 for t in g.nodes}, 0.0)
    (s,) = community_summary(p, eigenvector(g), top_k=10)
    assert s.size == 4 and [t for t, _ in s.top] == ["k0", "k1", "k2", "k3"]


def test_summary_bridge_endpoints_lead(two_triangles):
    p = detect_communities(two_triangles)
    out = community_summary(p, degree(two_triangles), top_k=1)
    assert [s.top for s in out] == [[("c", 3.0)], [("d", 3.0)]]


def test_summary_top_zero_and_errors(two_triangles):
    p = detect_communities(two_triangles)
    assert all(s.top == [] for s in community_summary(p, degree(two_triangles), top_k=0))
    with pytest.raises(PartitionError):
        community_summary(p, {"a": 1.0}, top_k=1)


def test_summary_orders_by_size():
    g = make_graph([("a", "b"), ("b", "c"), ("a", "c"), ("c", "d"), ("d", "e"), ("d", "f"),
                    ("e", "f"), ("x", "y")])
    p = detect_communities(g)
    sizes = [s.size for s in community_summary(p, degree(g))]
    assert sizes == sorted(sizes, reverse=True)
