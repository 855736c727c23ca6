import itertools
import math
import random

import pytest

from cascademorph.cascade import CascadeGraph, Edge
from cascademorph.graph_metrics import (
    DisconnectedGraphError,
    avg_clustering,
    baseline_features,
    clique_number,
    count_spanning_trees,
    diameter_apl,
    edge_growth_rate,
    undirected_view,
)

from helpers import random_cascade


def adj_from(n, edges):
    adj = {i: set() for i in range(n)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def complete(n):
    return adj_from(n, itertools.combinations(range(n), 2))


def random_connected(rnd, n):
    while True:
        p = rnd.uniform(0.2, 0.9)
        edges = [e for e in itertools.combinations(range(n), 2) if rnd.random() < p]
        adj = adj_from(n, edges)
        if _components(adj, edges) == 1:
            return adj, edges


def _components(adj, edges):
    # union-find, independent of the BFS under test
    parent = list(range(len(adj)))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for u, v in edges:
        parent[find(u)] = find(v)
    return len({find(x) for x in range(len(adj))})


# brute-force oracles -------------------------------------------------------

def brute_spanning_trees(n, edges):
    if n == 1:
        return 1
    return sum(1 for sub in itertools.combinations(edges, n - 1) if _components({i: 0 for i in range(n)}, sub) == 1)


def floyd(n, edges):
    d = [[0 if i == j else math.inf for j in range(n)] for i in range(n)]
    for u, v in edges:
        d[u][v] = d[v][u] = 1
    for k in range(n):
        for i in range(n):
            for j in range(n):
                d[i][j] = min(d[i][j], d[i][k] + d[k][j])
    return d


def brute_clustering(n, edges):
    es = {frozenset(e) for e in edges}
    total = 0.0
    for v in range(n):
        nb = [u for u in range(n) if frozenset((u, v)) in es]
        if len(nb) < 2:
            continue
        tri = sum(1 for a, b in itertools.combinations(nb, 2) if frozenset((a, b)) in es)
        total += tri / math.comb(len(nb), 2)
    return total / n


def brute_clique(n, edges):
    es = {frozenset(e) for e in edges}
    best = 1
    for size in range(2, n + 1):
        for sub in itertools.combinations(range(n), size):
            if all(frozenset(p) in es for p in itertools.combinations(sub, 2)):
                best = size
    return best


def test_random_graphs_match_brute_force():
    rnd = random.Random(42)
    for _ in range(200):
        n = rnd.randint(1, 6)
        adj, edges = random_connected(rnd, n)
        d = floyd(n, edges)
        diam, apl = diameter_apl(adj)
        assert diam == max(max(row) for row in d)
        if n > 1:
            assert apl == pytest.approx(sum(map(sum, d)) / (n * (n - 1)), abs=1e-9)
        st = count_spanning_trees(adj)
        assert st.count == brute_spanning_trees(n, edges)
        assert st.log_value == pytest.approx(math.log(st.count), abs=1e-9)
        assert avg_clustering(adj) == pytest.approx(brute_clustering(n, edges), abs=1e-9)
        assert clique_number(adj) == brute_clique(n, edges)


def test_known_values():
    assert count_spanning_trees(complete(3)).count == 3
    assert count_spanning_trees(complete(4)).count == 16
    assert avg_clustering(complete(3)) == 1.0
    assert clique_number(complete(3)) == 3
    star = adj_from(5, [(0, i) for i in range(1, 5)])
    assert avg_clustering(star) == 0.0
    assert clique_number(star) == 2
    assert diameter_apl(adj_from(2, [(0, 1)])) == (1, 1.0)
    diam, apl = diameter_apl(adj_from(3, [(0, 1), (1, 2)]))
    assert (diam, apl) == (2, pytest.approx(4 / 3))


def test_large_graph_eigen_path_agrees_with_cayley():
    # beyond the exact-determinant size the eigenvalue product is used
    n = 90
    st = count_spanning_trees(complete(n))
    assert st.log_value == pytest.approx((n - 2) * math.log(n), rel=1e-9)
    cycle = adj_from(n, [(i, (i + 1) % n) for i in range(n)])
    assert count_spanning_trees(cycle).count == n


def test_disconnected_errors():
    adj = adj_from(4, [(0, 1), (2, 3)])
    with pytest.raises(DisconnectedGraphError, match="disconnected graph"):
        count_spanning_trees(adj)
    with pytest.raises(DisconnectedGraphError):
        diameter_apl(adj)


def test_toy_cascade_metrics(toy_cascade):
    adj = undirected_view(toy_cascade)
    names = ["A", "B", "C", "D", "E"]
    idx = {u: i for i, u in enumerate(names)}
    edges = sorted({tuple(sorted((idx[e.src], idx[e.dst]))) for e in toy_cascade.edges})
    assert diameter_apl(adj) == (3, pytest.approx(1.6))
    assert avg_clustering(adj) == pytest.approx(1 / 3)
    assert clique_number(adj) == 3
    assert count_spanning_trees(adj).count == brute_spanning_trees(5, edges) == 3


def test_baseline_single_edge():
    c = CascadeGraph("a", ("a", "b"), (Edge("a", "b", 5),), {"a": 0, "b": 5})
    f = baseline_features(c)
    assert (f.node_count, f.root_degree, f.diameter, f.clique_number) == (2, 1, 1, 2)
    assert f.avg_path_length == 1.0
    assert f.spanning_tree_count == 0.0  # log of 1
    assert f.avg_clustering == 0.0
    assert f.edge_growth_rate == pytest.approx(1 / 5)
    assert len(f.as_vector()) == len(f.names()) == 8


def test_growth_rate_zero_span():
    c = CascadeGraph("a", ("a", "b"), (Edge("a", "b", 0),), {"a": 0, "b": 0})
    assert edge_growth_rate(c) == 0.0
    assert edge_growth_rate(CascadeGraph("a", ("a",), (), {"a": 3})) == 0.0


def test_tree_cascades_have_one_spanning_tree():
    rnd = random.Random(9)
    for _ in range(100):
        c = random_cascade(rnd)
        f = baseline_features(c)
        if c.n_edges == c.n_nodes - 1:
            assert f.spanning_tree_count == 0.0
            assert f.clique_number == (2 if c.n_edges else 1)
        assert f.spanning_tree_count >= 0
        assert 0 <= f.avg_clustering <= 1
        if c.n_nodes >= 2:
            assert f.diameter >= 1
