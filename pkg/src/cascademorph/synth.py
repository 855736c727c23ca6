"""Seeded synthetic follower graphs and two-regime cascade corpora."""
from __future__ import annotations

import heapq
from dataclasses import asdict, dataclass, field

import numpy as np

from .cascade import ActionEvent, FollowerGraph, build_cascade


@dataclass(frozen=True)
class RegimeParams:
    """Spreading behaviour of one cascade class.

    The root always reshares; any other adopter reshares with probability
    ``1 - p_stop``. A resharing user activates each of its followers with
    probability ``branching / out_degree`` (capped at 1), so it recruits about
    ``branching`` followers on average (``root_branching`` for the root).
    Adopters at ``max_depth`` hops from the root never reshare, and nobody
    adopts after time ``lifetime`` (0 disables either limit).
    """

    p_stop: float
    branching: float
    root_branching: float
    max_depth: int = 0
    lifetime: int = 0


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 7
    user_count: int = 4000
    follows_per_user: int = 5
    min_root_followers: int = 10
    attachment_exponent: float = 1.0
    reciprocity: float = 0.6
    triadic_closure: float = 0.0
    cascade_count: int = 1000  # per class
    # root -> a few hubs -> leaves, dying out after a short lifetime
    shallow: RegimeParams = field(default_factory=lambda: RegimeParams(0.05, 6.0, 1.5, max_depth=2, lifetime=18))
    # narrow start that keeps branching downwards
    deep: RegimeParams = field(default_factory=lambda: RegimeParams(0.05, 2.2, 1.6))
    step_p: float = 0.3  # geometric parameter of the delay between consecutive arrivals
    arrival: str = "sequential"  # or "independent": each follower delayed from the adopter on its own
    max_adopters: int = 300
    tau2: int = 20

    def validate(self) -> None:
        if self.user_count < 2:
            raise ValueError("user_count must be at least 2")
        if self.cascade_count < 1 or self.follows_per_user < 1 or self.max_adopters < 1:
            raise ValueError("counts must be positive")
        if not (0 <= self.reciprocity <= 1 and 0 <= self.triadic_closure <= 1):
            raise ValueError("reciprocity and triadic_closure must lie in [0, 1]")
        if not 0 < self.step_p < 1:
            raise ValueError("step_p must lie in (0, 1)")
        if self.arrival not in ("sequential", "independent"):
            raise ValueError("arrival must be 'sequential' or 'independent'")
        for r in (self.shallow, self.deep):
            if not 0 < r.p_stop < 1:
                raise ValueError("p_stop must lie in (0, 1)")
            if r.branching < 0 or r.root_branching < 0:
                raise ValueError("branching must be non-negative")
            if r.max_depth < 0 or r.lifetime < 0:
                raise ValueError("max_depth and lifetime must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> GeneratorConfig:
        d = dict(d)
        for key in ("shallow", "deep"):
            if key in d and isinstance(d[key], dict):
                d[key] = RegimeParams(**d[key])
        return cls(**d)


def user_name(i: int) -> str:
    return f"u{i:05d}"


def generate_follower_graph(cfg: GeneratorConfig) -> FollowerGraph:
    """Preferential attachment: each new user follows ``follows_per_user`` earlier
    users chosen with probability proportional to ``(followers + 1) ** exponent``;
    each followed user follows back with probability ``reciprocity``, and with
    probability ``triadic_closure`` the new user also follows one of the
    followed user's own followees."""
    cfg.validate()
    rng = np.random.default_rng([cfg.seed, 0])
    n = cfg.user_count
    out_deg = np.zeros(n)
    followees: list[list[int]] = [[] for _ in range(n)]
    edge_set: set[tuple[int, int]] = set()

    def add(u: int, v: int) -> None:
        if u != v and (u, v) not in edge_set:
            edge_set.add((u, v))
            followees[v].append(u)
            out_deg[u] += 1

    for v in range(1, n):
        w = (out_deg[:v] + 1.0) ** cfg.attachment_exponent
        m = min(cfg.follows_per_user, v)
        targets = rng.choice(v, size=m, replace=False, p=w / w.sum())
        back = rng.random(m) < cfg.reciprocity
        close = rng.random(m) < cfg.triadic_closure
        for u, b, c in zip(targets.tolist(), back, close):
            if c and followees[u]:
                add(followees[u][int(rng.integers(len(followees[u])))], v)
            add(u, v)
            if b:
                add(v, u)
    edges = sorted(edge_set)
    return FollowerGraph.from_edges(
        ((user_name(u), user_name(v)) for u, v in edges), nodes=[user_name(i) for i in range(n)])


def simulate_cascade(fg: FollowerGraph, root: str, regime: RegimeParams, cfg: GeneratorConfig, rng) -> list[tuple[str, int]]:
    """Independent-cascade style spread; returns ``(user, time)`` in activation order.

    With sequential arrival the recruits of one adopter show up one after
    another in random order, each a geometric step after the previous one, so
    the pace of a cascade does not reveal how large an audience it reached.
    A follower reached along several paths adopts at the earliest arrival.
    Timestamps are finally nudged forward so that no two adopters share one.
    """
    times = {root: 0}
    depth = {root: 0}
    heap = [(0, root)]
    activated: list[tuple[str, int]] = []
    seen: set[str] = set()
    while heap and len(activated) < cfg.max_adopters:
        t, w = heapq.heappop(heap)
        if w in seen or times[w] != t:
            continue
        seen.add(w)
        activated.append((w, t))
        if w != root and rng.random() < regime.p_stop:
            continue
        if regime.max_depth and depth[w] >= regime.max_depth:
            continue
        followers = fg.followers(w)
        if not followers:
            continue
        mean = regime.root_branching if w == root else regime.branching
        hits = rng.random(len(followers)) < min(1.0, mean / len(followers))
        recruits = [f for f, hit in zip(followers, hits) if hit]
        delays = rng.geometric(cfg.step_p, size=len(recruits))
        if cfg.arrival == "sequential":
            recruits = [recruits[i] for i in rng.permutation(len(recruits))]
            delays = np.cumsum(delays)
        for f, d in zip(recruits, delays):
            if f not in seen:
                tf = t + int(d)
                if regime.lifetime and tf > regime.lifetime:
                    continue
                if tf < times.get(f, tf + 1):
                    times[f] = tf
                    depth[f] = depth[w] + 1
                    heapq.heappush(heap, (tf, f))
    return _strictly_increasing(activated)


def _strictly_increasing(acts: list[tuple[str, int]]) -> list[tuple[str, int]]:
    """Shift tied times forward; order and parent-before-child are preserved."""
    out = []
    last = -1
    for u, t in acts:
        last = max(t, last + 1)
        out.append((u, last))
    return out


@dataclass
class Corpus:
    follower_graph: FollowerGraph
    events: list[ActionEvent]
    labels: dict[str, int]  # cascade id -> size label (final edges >= tau2)
    final_edges: dict[str, int]
    regimes: dict[str, str]  # cascade id -> "shallow" | "deep"


def generate_cascades(fg: FollowerGraph, cfg: GeneratorConfig) -> Corpus:
    """Simulate ``cascade_count`` cascades per regime.

    Roots are drawn uniformly from users with at least ``min_root_followers``
    followers.

    Labels follow the reconstructed cascade: 1 iff it has at least ``tau2`` edges.
    """
    cfg.validate()
    rng = np.random.default_rng([cfg.seed, 1])
    users = sorted(u for u in fg.nodes if len(fg.followers(u)) >= cfg.min_root_followers)
    if not users:
        raise ValueError("no user has enough followers to seed a cascade")
    events: list[ActionEvent] = []
    labels, sizes, regimes = {}, {}, {}
    order = [("shallow", cfg.shallow), ("deep", cfg.deep)] * cfg.cascade_count
    perm = rng.permutation(len(order))
    for i, j in enumerate(perm):
        name, regime = order[j]
        cid = f"c{i:05d}"
        root = users[int(rng.integers(len(users)))]
        acts = simulate_cascade(fg, root, regime, cfg, rng)
        evs = [ActionEvent(cid, u, t) for u, t in acts]
        c = build_cascade(fg, evs)
        events.extend(evs)
        sizes[cid] = c.n_edges
        labels[cid] = int(c.n_edges >= cfg.tau2)
        regimes[cid] = name
    return Corpus(fg, events, labels, sizes, regimes)


def generate(cfg: GeneratorConfig | None = None) -> Corpus:
    cfg = cfg or GeneratorConfig()
    return generate_cascades(generate_follower_graph(cfg), cfg)
