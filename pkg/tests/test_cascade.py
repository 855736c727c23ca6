import itertools
import random
from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cascademorph.cascade import (
    ActionEvent,
    CascadeGraph,
    DataError,
    Edge,
    FollowerGraph,
    build_cascade,
    read_actions,
    read_follower_graph,
    truncate,
    write_actions,
    write_follower_graph,
)


def test_toy_cascade_edges(toy_cascade):
    assert toy_cascade.root == "A"
    assert toy_cascade.edges == (
        Edge("A", "B", 2), Edge("A", "D", 3), Edge("B", "D", 3), Edge("B", "C", 4), Edge("D", "E", 5),
    )
    assert toy_cascade.nodes == ("A", "B", "D", "C", "E")


def test_single_event():
    c = build_cascade(FollowerGraph.from_edges([]), [ActionEvent("x", "A", 1)])
    assert c.root == "A" and c.nodes == ("A",) and c.edges == ()


def test_errors(toy_fg):
    with pytest.raises(DataError, match="empty cascade"):
        build_cascade(toy_fg, [])
    with pytest.raises(DataError, match="duplicate actor"):
        build_cascade(toy_fg, [ActionEvent("x", "A", 1), ActionEvent("x", "A", 2)])


def test_follower_graph_rejects_self_loop():
    with pytest.raises(DataError):
        FollowerGraph.from_edges([("A", "A")])


def test_orphan_attaches_to_root(toy_fg):
    # Z follows nobody who acted, so the repost references the origin
    c = build_cascade(toy_fg, [ActionEvent("x", "A", 1), ActionEvent("x", "Z", 4)])
    assert c.edges == (Edge("A", "Z", 4),)


def brute_force_edges(fg, events):
    """Edge (u, v) iff u acted strictly before v and v follows u; fallback to root."""
    ordered = sorted(events, key=lambda e: (e.ts, e.user))
    root = ordered[0]
    out = set()
    for v in ordered[1:]:
        found = False
        for u in ordered:
            if u.ts < v.ts and (u.user, v.user) in fg.edges:
                out.add((u.user, v.user, v.ts))
                found = True
        if not found:
            out.add((root.user, v.user, v.ts))
    return out


def _is_acyclic_connected(c: CascadeGraph) -> bool:
    indeg = {n: 0 for n in c.nodes}
    succ = {n: [] for n in c.nodes}
    for e in c.edges:
        indeg[e.dst] += 1
        succ[e.src].append(e.dst)
    q = deque(n for n in c.nodes if indeg[n] == 0)
    seen = 0
    while q:
        u = q.popleft()
        seen += 1
        for w in succ[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                q.append(w)
    if seen != len(c.nodes):
        return False
    reach = {c.root}
    q = deque([c.root])
    while q:
        u = q.popleft()
        for w in succ[u]:
            if w not in reach:
                reach.add(w)
                q.append(w)
    return reach == set(c.nodes)


@pytest.mark.parametrize("seed", range(30))
def test_matches_brute_force_rule(seed):
    rnd = random.Random(seed)
    users = [f"v{i}" for i in range(20)]
    edges = {(u, v) for u, v in itertools.permutations(users, 2) if rnd.random() < 0.15}
    fg = FollowerGraph.from_edges(edges, nodes=users)
    actors = rnd.sample(users, 10)
    events = [ActionEvent("c", u, rnd.randint(0, 6)) for u in actors]
    c = build_cascade(fg, events)
    assert set(c.edges) == brute_force_edges(fg, events)
    assert _is_acyclic_connected(c)
    assert c.n_edges >= c.n_nodes - 1
    indeg = {n: 0 for n in c.nodes}
    for e in c.edges:
        indeg[e.dst] += 1
    assert all(indeg[n] >= 1 for n in c.nodes if n != c.root)
    # order independence
    shuffled = events[:]
    rnd.shuffle(shuffled)
    assert build_cascade(fg, shuffled).edges == c.edges


def test_truncate(toy_cascade):
    assert truncate(toy_cascade, 100) == toy_cascade
    t2 = truncate(toy_cascade, 2)
    assert t2.edges == (Edge("A", "B", 2), Edge("A", "D", 3))
    assert set(t2.nodes) == {"A", "B", "D"}
    t0 = truncate(toy_cascade, 0)
    assert t0.nodes == ("A",) and t0.edges == ()


@settings(max_examples=50, deadline=None)
@given(a=st.integers(0, 8), b=st.integers(0, 8))
def test_truncate_composes(a, b):
    fg = FollowerGraph.from_edges([("A", "B"), ("A", "D"), ("B", "D"), ("B", "C"), ("D", "E"), ("C", "E")])
    c = build_cascade(fg, [ActionEvent("t", u, t) for u, t in [("A", 1), ("B", 2), ("D", 3), ("C", 4), ("E", 5)]])
    assert truncate(truncate(c, a), b) == truncate(c, min(a, b))


def test_file_round_trip(tmp_path, toy_fg, toy_events):
    write_follower_graph(toy_fg, tmp_path / "f.tsv")
    write_actions(toy_events, tmp_path / "a.jsonl")
    fg = read_follower_graph(tmp_path / "f.tsv")
    assert fg.edges == toy_fg.edges
    groups = read_actions(tmp_path / "a.jsonl")
    assert list(groups) == ["toy"]
    assert groups["toy"] == toy_events


def test_follower_file_comments(tmp_path):
    p = tmp_path / "f.tsv"
    p.write_text("# header\nA\tB\n\nB\tC  # trailing\n", encoding="utf-8")
    assert read_follower_graph(p).edges == {("A", "B"), ("B", "C")}


def test_bad_action_line(tmp_path):
    p = tmp_path / "a.jsonl"
    p.write_text('{"cascade_id": "x", "user": "A"}\n', encoding="utf-8")
    with pytest.raises(DataError):
        read_actions(p)
