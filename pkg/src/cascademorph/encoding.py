"""Depth-first binary encoding of cascades and its run-length form.

A cascade is traversed depth first from the root, visiting the outgoing edges
of each node in increasing ``(timestamp, destination)`` order and skipping
edges into already visited nodes. Every downward step emits ``1`` and every
return emits ``0``, so the code is a Dyck word of length ``2 * (n_nodes - 1)``.
"""
from __future__ import annotations

from itertools import groupby
from typing import Sequence

from .cascade import CascadeGraph, Edge


class EncodingError(ValueError):
    pass


def dfs_encode(c: CascadeGraph) -> tuple[int, ...]:
    children = {n: [] for n in c.nodes}
    for e in c.edges:
        children[e.src].append(e)
    for n in children:
        children[n].sort(key=lambda e: (e.ts, e.dst))

    bits: list[int] = []
    visited = {c.root}
    # stack of (node, iterator over its sorted out-edges)
    stack = [(c.root, iter(children[c.root]))]
    while stack:
        node, it = stack[-1]
        for e in it:
            if e.dst not in visited:
                visited.add(e.dst)
                bits.append(1)
                stack.append((e.dst, iter(children[e.dst])))
                break
        else:
            stack.pop()
            if stack:
                bits.append(0)
    if len(visited) != len(c.nodes):
        raise EncodingError("unreachable node")
    return tuple(bits)


def is_dyck(bits: Sequence[int]) -> bool:
    depth = 0
    for b in bits:
        depth += 1 if b else -1
        if depth < 0:
            return False
    return depth == 0


def rle_encode(bits: Sequence[int]) -> tuple[int, ...]:
    """Run lengths of maximal runs; codes start with a 1-run by construction."""
    if bits and bits[0] != 1:
        raise EncodingError("code must start with 1")
    return tuple(len(list(g)) for _, g in groupby(bits))


def rle_decode(runs: Sequence[int]) -> tuple[int, ...]:
    bits: list[int] = []
    for i, r in enumerate(runs):
        if int(r) != r or r < 1:
            raise EncodingError("malformed run")
        bits.extend([1 - (i % 2)] * int(r))
    return tuple(bits)


def decode_tree(bits: Sequence[int]) -> CascadeGraph:
    """Rebuild an anonymous tree whose traversal code is ``bits``.

    Nodes are named ``n0`` (root), ``n1``, ... in discovery order and the edge
    into ``n<i>`` carries timestamp ``i``, so re-encoding yields ``bits``.
    """
    if not is_dyck(bits):
        raise EncodingError("unbalanced traversal")
    nodes = ["n0"]
    times = {"n0": 0}
    edges = []
    path = ["n0"]
    for b in bits:
        if b:
            i = len(nodes)
            name = f"n{i}"
            nodes.append(name)
            times[name] = i
            edges.append(Edge(path[-1], name, i))
            path.append(name)
        else:
            path.pop()
    edges.sort(key=lambda e: (e.ts, e.src, e.dst))
    return CascadeGraph("n0", tuple(nodes), tuple(edges), times)


def encode(c: CascadeGraph) -> tuple[int, ...]:
    """Run-length sequence of a cascade (the symbol stream the Markov model sees)."""
    return rle_encode(dfs_encode(c))


def bits_to_str(bits: Sequence[int]) -> str:
    return "".join("1" if b else "0" for b in bits)


def str_to_bits(s: str) -> tuple[int, ...]:
    if set(s) - {"0", "1"}:
        raise EncodingError(f"not a binary string: {s!r}")
    return tuple(int(ch) for ch in s)
