"""Follower graphs, action logs and cascade graph reconstruction."""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class Edge(NamedTuple):
    src: str
    dst: str
    ts: int


class ActionEvent(NamedTuple):
    cascade_id: str
    user: str
    ts: int


@dataclass(frozen=True)
class FollowerGraph:
    """Directed relationship graph; an edge ``u -> v`` means v follows u."""

    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]
    _followees: Mapping[str, frozenset[str]] = field(default=None, repr=False, compare=False)
    _followers: Mapping[str, tuple[str, ...]] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        followees = defaultdict(set)
        followers = defaultdict(list)
        for u, v in self.edges:
            if u == v:
                raise DataError(f"self-loop on {u!r}")
            if u not in self.nodes or v not in self.nodes:
                raise DataError(f"edge ({u!r}, {v!r}) has an endpoint outside the node set")
            followees[v].add(u)
            followers[u].append(v)
        object.__setattr__(self, "_followees", {v: frozenset(us) for v, us in followees.items()})
        object.__setattr__(self, "_followers", {u: tuple(sorted(vs)) for u, vs in followers.items()})

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], nodes: Iterable[str] = ()) -> FollowerGraph:
        edges = frozenset((str(u), str(v)) for u, v in edges)
        all_nodes = set(nodes)
        for u, v in edges:
            all_nodes.add(u)
            all_nodes.add(v)
        return cls(frozenset(all_nodes), edges)

    def followees(self, v: str) -> frozenset[str]:
        """Users that ``v`` follows, i.e. sources of edges into ``v``."""
        return self._followees.get(v, frozenset())

    def followers(self, u: str) -> tuple[str, ...]:
        """Users following ``u``, sorted."""
        return self._followers.get(u, ())


@dataclass(frozen=True)
class CascadeGraph:
    """Acyclic propagation graph rooted at the originating user.

    ``nodes`` are ordered by action order, ``edges`` by ``(ts, src, dst)``.
    ``times`` maps every node to the time of its action.
    """

    root: str
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    times: Mapping[str, int] = field(compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def successors(self) -> dict[str, list[Edge]]:
        out: dict[str, list[Edge]] = {n: [] for n in self.nodes}
        for e in self.edges:
            out[e.src].append(e)
        return out

    def to_dict(self) -> dict:
        return {
            "root": self.root,
            "nodes": list(self.nodes),
            "times": {n: self.times[n] for n in self.nodes},
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> CascadeGraph:
        edges = tuple(sorted((Edge(str(s), str(t), int(ts)) for s, t, ts in d["edges"]), key=_edge_key))
        return cls(d["root"], tuple(d["nodes"]), edges, dict(d["times"]))


def _edge_key(e: Edge):
    return (e.ts, e.src, e.dst)


def build_cascade(fg: FollowerGraph, events: Iterable[ActionEvent]) -> CascadeGraph:
    """Reconstruct the cascade graph of a single cascade.

    The earliest actor is the root. Every later actor ``v`` receives an edge
    from each strictly earlier actor it follows; an actor with no such
    influencer is attached to the root (reposts always reference the origin).
    """
    ordered = sorted(events, key=lambda ev: (ev.ts, ev.user))
    if not ordered:
        raise DataError("empty cascade")
    times: dict[str, int] = {}
    for ev in ordered:
        if ev.user in times:
            raise DataError("duplicate actor")
        times[ev.user] = int(ev.ts)

    root = ordered[0].user
    edges: list[Edge] = []
    for ev in ordered[1:]:
        v, tv = ev.user, int(ev.ts)
        parents = [u for u in fg.followees(v) if u in times and times[u] < tv]
        if parents:
            edges.extend(Edge(u, v, tv) for u in parents)
        else:
            edges.append(Edge(root, v, tv))
    edges.sort(key=_edge_key)
    return CascadeGraph(root, tuple(ev.user for ev in ordered), tuple(edges), times)


def truncate(c: CascadeGraph, tau1: int) -> CascadeGraph:
    """Keep the first ``tau1`` edges (in ``(ts, src, dst)`` order) and their endpoints."""
    if tau1 < 0:
        raise ValueError("tau1 must be non-negative")
    if tau1 >= c.n_edges:
        return c
    kept = c.edges[:tau1]
    present = {c.root}
    for e in kept:
        present.add(e.src)
        present.add(e.dst)
    nodes = tuple(n for n in c.nodes if n in present)
    return CascadeGraph(c.root, nodes, kept, {n: c.times[n] for n in nodes})


# --- file formats -----------------------------------------------------------

def read_follower_graph(path: str | Path) -> FollowerGraph:
    """Read ``src<TAB>dst`` lines; blank lines and ``#`` comments are skipped."""
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'src<TAB>dst'")
            edges.append((parts[0].strip(), parts[1].strip()))
    return FollowerGraph.from_edges(edges)


def write_follower_graph(fg: FollowerGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# src\tdst  (dst follows src)\n")
        for u, v in sorted(fg.edges):
            fh.write(f"{u}\t{v}\n")


def read_actions(path: str | Path) -> dict[str, list[ActionEvent]]:
    """Read a JSON-lines action log, grouped by cascade id (in first-seen order)."""
    groups: dict[str, list[ActionEvent]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                ev = ActionEvent(str(rec["cascade_id"]), str(rec["user"]), int(rec["ts"]))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: bad action record ({exc})") from exc
            groups.setdefault(ev.cascade_id, []).append(ev)
    return groups


def write_actions(events: Iterable[ActionEvent], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ev in events:
            fh.write(json.dumps({"cascade_id": ev.cascade_id, "user": ev.user, "ts": ev.ts}) + "\n")


def build_all(fg: FollowerGraph, groups: Mapping[str, list[ActionEvent]]) -> dict[str, CascadeGraph]:
    return {cid: build_cascade(fg, evs) for cid, evs in groups.items()}
