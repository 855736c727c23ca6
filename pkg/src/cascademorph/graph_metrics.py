"""Structural cascade metrics used by the baseline predictor.

Path and connectivity metrics are computed on the undirected simple view of a
cascade, given as an adjacency mapping ``node -> set(neighbours)``.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import astuple, dataclass, fields
from typing import Mapping, NamedTuple

import numpy as np

from .cascade import CascadeGraph

Adjacency = Mapping[str, set]

EXACT_DET_MAX_NODES = 80


class DisconnectedGraphError(ValueError):
    pass


def undirected_view(c: CascadeGraph) -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {n: set() for n in c.nodes}
    for e in c.edges:
        adj[e.src].add(e.dst)
        adj[e.dst].add(e.src)
    return adj


def _bfs(adj: Adjacency, source) -> dict:
    dist = {source: 0}
    q = deque([source])
    while q:
        u = q.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def is_connected(adj: Adjacency) -> bool:
    if not adj:
        return True
    return len(_bfs(adj, next(iter(adj)))) == len(adj)


def diameter_apl(adj: Adjacency) -> tuple[int, float]:
    """Diameter and mean shortest-path length over ordered pairs of distinct nodes."""
    n = len(adj)
    if n == 0:
        raise ValueError("empty graph")
    diameter = 0
    total = 0
    for u in adj:
        dist = _bfs(adj, u)
        if len(dist) != n:
            raise DisconnectedGraphError("disconnected graph")
        diameter = max(diameter, max(dist.values()))
        total += sum(dist.values())
    if n == 1:
        return 0, 0.0
    return diameter, total / (n * (n - 1))


def avg_clustering(adj: Adjacency) -> float:
    if not adj:
        raise ValueError("empty graph")
    acc = 0.0
    for u, nbrs in adj.items():
        d = len(nbrs)
        if d < 2:
            continue
        nb = list(nbrs)
        tri = sum(1 for i in range(d) for j in range(i + 1, d) if nb[j] in adj[nb[i]])
        acc += 2.0 * tri / (d * (d - 1))
    return acc / len(adj)


def clique_number(adj: Adjacency) -> int:
    """Exact maximum clique size (Bron-Kerbosch with pivoting and a size bound)."""
    if not adj:
        raise ValueError("empty graph")
    best = 1

    def expand(r_size: int, p: set, x: set):
        nonlocal best
        if not p:
            if not x and r_size > best:
                best = r_size
            return
        if r_size + len(p) <= best:
            return
        pivot = max(p | x, key=lambda u: len(adj[u] & p))
        for v in list(p - adj[pivot]):
            expand(r_size + 1, p & adj[v], x & adj[v])
            p.remove(v)
            x.add(v)

    expand(0, set(adj), set())
    return best


class SpanningTreeCount(NamedTuple):
    log_value: float
    count: int | None  # exact value when it is below 2**53


def _bareiss_det(m: list[list[int]]) -> int:
    """Exact integer determinant via fraction-free elimination."""
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def count_spanning_trees(adj: Adjacency) -> SpanningTreeCount:
    """Matrix-tree count of spanning trees.

    Small graphs use an exact integer determinant of the reduced Laplacian;
    larger ones the product of non-zero Laplacian eigenvalues divided by n.
    """
    nodes = sorted(adj)
    n = len(nodes)
    if n == 0:
        raise ValueError("empty graph")
    if not is_connected(adj):
        raise DisconnectedGraphError("disconnected graph")
    if n == 1:
        return SpanningTreeCount(0.0, 1)
    idx = {u: i for i, u in enumerate(nodes)}
    if n <= EXACT_DET_MAX_NODES:
        lap = [[0] * n for _ in range(n)]
        for u in nodes:
            i = idx[u]
            lap[i][i] = len(adj[u])
            for w in adj[u]:
                lap[i][idx[w]] = -1
        t = _bareiss_det([row[1:] for row in lap[1:]])
        return SpanningTreeCount(math.log(t), t if t < 2 ** 53 else None)
    lap = np.zeros((n, n))
    for u in nodes:
        i = idx[u]
        lap[i, i] = len(adj[u])
        for w in adj[u]:
            lap[i, idx[w]] = -1.0
    eig = np.sort(np.linalg.eigvalsh(lap))[1:]
    log_t = float(np.log(eig).sum() - math.log(n))
    value = math.exp(log_t) if log_t < 53 * math.log(2) else None
    return SpanningTreeCount(log_t, None if value is None else int(round(value)))


@dataclass(frozen=True)
class BaselineFeatures:
    edge_growth_rate: float
    node_count: int
    root_degree: int
    avg_path_length: float
    diameter: int
    spanning_tree_count: float  # natural log of t(G)
    avg_clustering: float
    clique_number: int

    @classmethod
    def names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_vector(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


def edge_growth_rate(c: CascadeGraph) -> float:
    """Edges per time unit from the root's action to the last edge; 0 for a zero span."""
    if not c.edges:
        return 0.0
    span = c.edges[-1].ts - c.times[c.root]
    return c.n_edges / span if span > 0 else 0.0


def baseline_features(c: CascadeGraph) -> BaselineFeatures:
    adj = undirected_view(c)
    diam, apl = diameter_apl(adj)
    return BaselineFeatures(
        edge_growth_rate=edge_growth_rate(c),
        node_count=c.n_nodes,
        root_degree=len(adj[c.root]),
        avg_path_length=apl,
        diameter=diam,
        spanning_tree_count=count_spanning_trees(adj).log_value,
        avg_clustering=avg_clustering(adj),
        clique_number=clique_number(adj),
    )
