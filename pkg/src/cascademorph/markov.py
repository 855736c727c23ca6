"""Autocorrelation-based order selection and multi-order Markov chains over run-length symbols."""
from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

Z_95 = 1.96


class DegenerateSequenceError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class AcfResult:
    lags: np.ndarray
    rho: np.ndarray
    envelope: float


def autocorrelation(seq: Sequence[float], max_lag: int) -> AcfResult:
    """Biased sample autocorrelation with the global mean and variance.

    The envelope is the 95% band ``1.96 / sqrt(len(seq))`` for white noise.
    """
    x = np.asarray(seq, dtype=float)
    m = len(x)
    if m < 2:
        raise ValueError("need at least two observations")
    if not 1 <= max_lag < m:
        raise ValueError(f"max_lag must lie in [1, {m - 1}]")
    d = x - x.mean()
    denom = float(d @ d)
    if denom <= 1e-12 * m * max(1.0, float(np.abs(x).max())) ** 2:
        raise DegenerateSequenceError("degenerate sequence")
    rho = np.empty(max_lag + 1)
    rho[0] = 1.0
    for t in range(1, max_lag + 1):
        rho[t] = float(d[:-t] @ d[t:]) / denom
    return AcfResult(np.arange(max_lag + 1), rho, Z_95 / math.sqrt(m))


def select_order(seq: Sequence[float], max_order: int = 5, rule: str = "largest") -> int:
    """Markov order suggested by the lags whose autocorrelation leaves the 95% envelope.

    ``rule="largest"`` takes the largest significant lag up to ``max_order``;
    ``rule="first"`` takes the smallest. Returns 1 when nothing is significant
    or the sequence is too short or constant.
    """
    if rule not in ("largest", "first"):
        raise ValueError(f"unknown rule {rule!r}")
    max_lag = min(max_order, len(seq) - 1)
    if max_lag < 1:
        return 1
    try:
        acf = autocorrelation(seq, max_lag)
    except DegenerateSequenceError:
        return 1
    significant = [t for t in range(1, max_lag + 1) if abs(acf.rho[t]) > acf.envelope]
    if not significant:
        return 1
    return max(significant) if rule == "largest" else min(significant)


def select_global_order(seqs: Iterable[Sequence[float]], max_order: int = 5, rule: str = "largest") -> int:
    """Largest per-sequence order over a corpus, clamped to ``max_order``."""
    orders = [select_order(s, max_order, rule) for s in seqs]
    if not orders:
        raise ValueError("empty collection")
    return min(max(orders), max_order)


def _key(symbols: Sequence[int]) -> str:
    return "-".join(str(s) for s in symbols)


def _unkey(key: str) -> tuple[int, ...]:
    return tuple(int(s) for s in key.split("-")) if key else ()


@dataclass
class MarkovChain:
    """Order-``n`` chain over an alphabet of run-length symbols.

    Transition and initial counts are stored sparsely, keyed by symbol tuples.
    Conditional probabilities use additive smoothing,
    ``P(x | h) = (count(h, x) + alpha) / (count(h) + alpha * k)``.
    """

    order: int
    alphabet: tuple[int, ...]
    alpha: float
    initial_counts: dict[tuple[int, ...], int]
    transitions: dict[tuple[int, ...], dict[int, int]]
    _row_totals: dict = field(default_factory=dict, repr=False, compare=False)
    _initial_total: int = field(default=0, repr=False, compare=False)

    def __post_init__(self):
        self._row_totals = {h: sum(r.values()) for h, r in self.transitions.items()}
        self._initial_total = sum(self.initial_counts.values())

    @property
    def k(self) -> int:
        return len(self.alphabet)

    @property
    def n_states(self) -> int:
        """Number of representable histories, ``k ** order``."""
        return self.k ** self.order

    def prob(self, symbol: int, history: Sequence[int]) -> float:
        history = tuple(history[-self.order:])
        row = self.transitions.get(history, {})
        total = self._row_totals.get(history, 0)
        denom = total + self.alpha * self.k
        if denom == 0:
            return 0.0
        if symbol not in self.alphabet:
            return 0.0
        return (row.get(symbol, 0) + self.alpha) / denom

    def row(self, history: Sequence[int]) -> np.ndarray:
        """Conditional distribution over ``alphabet``; zeros for an unseen history when alpha is 0."""
        history = tuple(history[-self.order:])
        row = self.transitions.get(history, {})
        total = self._row_totals.get(history, 0)
        denom = total + self.alpha * self.k
        if denom == 0:
            return np.zeros(self.k)
        return np.array([(row.get(s, 0) + self.alpha) / denom for s in self.alphabet])

    def prefix_prob(self, prefix: Sequence[int]) -> float:
        """Smoothed probability that a sequence starts with ``prefix`` (length <= order).

        Shorter prefixes are marginals of the smoothed distribution over the
        ``k ** order`` possible initial histories.
        """
        j = len(prefix)
        if not 1 <= j <= self.order:
            raise ValueError("prefix length must lie in [1, order]")
        if any(s not in self.alphabet for s in prefix):
            return 0.0
        prefix = tuple(prefix)
        count = sum(c for h, c in self.initial_counts.items() if h[:j] == prefix)
        free = self.order - j
        denom = self._initial_total + self.alpha * self.k ** self.order
        if denom == 0:
            return 0.0
        return (count + self.alpha * self.k ** free) / denom

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "alphabet": list(self.alphabet),
            "alpha": self.alpha,
            "initial_counts": {_key(h): c for h, c in sorted(self.initial_counts.items())},
            "transitions": {
                _key(h): {str(s): c for s, c in sorted(r.items())}
                for h, r in sorted(self.transitions.items())
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, d: Mapping) -> MarkovChain:
        return cls(
            order=int(d["order"]),
            alphabet=tuple(int(s) for s in d["alphabet"]),
            alpha=float(d["alpha"]),
            initial_counts={_unkey(h): int(c) for h, c in d["initial_counts"].items()},
            transitions={
                _unkey(h): {int(s): int(c) for s, c in r.items()}
                for h, r in d["transitions"].items()
            },
        )

    @classmethod
    def from_json(cls, text: str) -> MarkovChain:
        return cls.from_dict(json.loads(text))


def count_transitions(seq: Sequence[int], order: int):
    """Per-sequence (initial, transition) counts; merge results with :func:`merge_counts`."""
    seq = tuple(int(s) for s in seq)
    initial: Counter = Counter()
    trans: dict = defaultdict(Counter)
    if len(seq) >= order + 1:
        initial[seq[:order]] += 1
        for t in range(order, len(seq)):
            trans[seq[t - order:t]][seq[t]] += 1
    return initial, trans


def merge_counts(parts):
    initial: Counter = Counter()
    trans: dict = defaultdict(Counter)
    for ini, tr in parts:
        initial.update(ini)
        for h, row in tr.items():
            trans[h].update(row)
    return initial, trans


def fit(seqs: Iterable[Sequence[int]], order: int, alpha: float = 1.0) -> MarkovChain:
    """Count-based fit of an order-``order`` chain.

    Only sequences with at least ``order + 1`` symbols contribute counts; the
    alphabet is every symbol observed in ``seqs``.
    """
    if order < 1:
        raise ValueError("order must be positive")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    seqs = [tuple(int(s) for s in q) for q in seqs]
    initial, trans = merge_counts(count_transitions(q, order) for q in seqs)
    if not initial:
        raise InsufficientDataError("insufficient data")
    alphabet = tuple(sorted({s for q in seqs for s in q}))
    return MarkovChain(
        order=order,
        alphabet=alphabet,
        alpha=float(alpha),
        initial_counts=dict(initial),
        transitions={h: dict(r) for h, r in trans.items()},
    )


def sequence_probability(m: MarkovChain, seq: Sequence[int]) -> float:
    """Natural-log probability of ``seq``; ``-inf`` when it has zero probability."""
    seq = tuple(int(s) for s in seq)
    if not seq:
        raise ValueError("empty sequence")
    head = seq[: m.order]
    p = m.prefix_prob(head)
    if p <= 0:
        return -math.inf
    logp = math.log(p)
    for t in range(m.order, len(seq)):
        p = m.prob(seq[t], seq[t - m.order:t])
        if p <= 0:
            return -math.inf
        logp += math.log(p)
    return logp


def sample_realizations(m: MarkovChain, count: int, length: int, seed) -> list[tuple[int, ...]]:
    """Draw ``count`` sample paths of ``length`` symbols.

    The first ``order`` symbols come from the smoothed initial distribution
    (drawn uniformly over all ``k ** order`` histories with the smoothing
    mass). An unseen history with ``alpha == 0`` continues uniformly.
    """
    if m.k == 0:
        raise ValueError("empty alphabet")
    if count < 1 or length < 1:
        raise ValueError("count and length must be positive")
    rng = np.random.default_rng(seed)
    alphabet = np.array(m.alphabet)
    heads = sorted(m.initial_counts)
    head_p = np.array([m.initial_counts[h] for h in heads], dtype=float)
    smooth_mass = m.alpha * m.k ** m.order
    p_uniform_head = smooth_mass / (smooth_mass + head_p.sum())
    head_p /= head_p.sum()
    uniform_row = np.full(m.k, 1.0 / m.k)
    cdf_cache: dict[tuple[int, ...], np.ndarray] = {}

    def cdf(history):
        c = cdf_cache.get(history)
        if c is None:
            row = m.row(history)
            s = row.sum()
            row = row / s if s > 0 else uniform_row
            c = np.cumsum(row)
            c[-1] = 1.0
            cdf_cache[history] = c
        return c

    out = []
    for _ in range(count):
        if rng.random() < p_uniform_head:
            path = [int(s) for s in rng.choice(alphabet, size=m.order)]
        else:
            path = list(heads[rng.choice(len(heads), p=head_p)])
        u = rng.random(max(0, length - m.order))
        for r in u:
            h = tuple(path[-m.order:])
            path.append(int(alphabet[np.searchsorted(cdf(h), r, side="right")]))
        out.append(tuple(path[:length]))
    return out
