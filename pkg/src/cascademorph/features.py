"""Markov-state features: typical-state candidates, information-gain ranking,
presence vectors, and a decorrelating KLT."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .markov import MarkovChain, sample_realizations


@dataclass(frozen=True)
class StateFeature:
    subsequence: tuple[int, ...]
    typicality_rank: int = 0
    info_gain: float = 0.0
    frequency: float = 0.0

    def to_dict(self) -> dict:
        return {
            "subsequence": list(self.subsequence),
            "typicality_rank": self.typicality_rank,
            "info_gain": self.info_gain,
            "frequency": self.frequency,
        }

    @classmethod
    def from_dict(cls, d) -> StateFeature:
        return cls(tuple(int(s) for s in d["subsequence"]), int(d["typicality_rank"]),
                   float(d["info_gain"]), float(d.get("frequency", 0.0)))


def substrings(seq: Sequence[int], max_len: int) -> set[tuple[int, ...]]:
    """All distinct contiguous subsequences of length 1..max_len."""
    seq = tuple(seq)
    n = len(seq)
    return {seq[i:i + L] for L in range(1, max_len + 1) for i in range(n - L + 1)}


def typical_states(
    m: MarkovChain,
    realization_count: int = 2000,
    realization_length: int = 40,
    max_states: int = 10000,
    seed=0,
    max_len: int | None = None,
) -> list[StateFeature]:
    """Rank subsequences of sampled realizations by empirical frequency.

    Subsequences of length 1..``max_len`` (default: the chain order) are
    counted over all sample paths; the frequency of a length-L state is its
    count divided by the number of length-L windows. Ties break
    lexicographically. At most ``max_states`` candidates are returned.
    """
    if realization_count < 1:
        raise ValueError("realization_count must be positive")
    max_len = m.order if max_len is None else max_len
    paths = sample_realizations(m, realization_count, realization_length, seed)
    counts: Counter = Counter()
    windows = Counter()
    for p in paths:
        n = len(p)
        for L in range(1, max_len + 1):
            if n >= L:
                windows[L] += n - L + 1
                counts.update(p[i:i + L] for i in range(n - L + 1))
    ranked = sorted(counts, key=lambda s: (-counts[s] / windows[len(s)], s))[:max_states]
    return [
        StateFeature(s, typicality_rank=i, frequency=counts[s] / windows[len(s)])
        for i, s in enumerate(ranked)
    ]


def _entropy(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n <= 0:
        return 0.0
    p = counts[counts > 0] / n
    return float(-(p * np.log2(p)).sum())


def _ig_from_table(n11: int, n10: int, n01: int, n00: int) -> float:
    """IG from a 2x2 table ``n[x][y]`` of feature value x against label y."""
    n = n11 + n10 + n01 + n00
    if n == 0:
        return 0.0
    h_y = _entropy([n11 + n01, n10 + n00])
    nx1 = n11 + n10
    nx0 = n01 + n00
    h_y_given_x = (nx1 / n) * _entropy([n11, n10]) + (nx0 / n) * _entropy([n01, n00])
    return max(0.0, h_y - h_y_given_x)


def information_gain(x: Sequence[int], y: Sequence[int]) -> float:
    """``H(Y) - H(Y | X)`` in bits for a binary feature column and binary labels."""
    x = np.asarray(x).astype(bool)
    y = np.asarray(y).astype(bool)
    if x.shape != y.shape:
        raise ValueError("length mismatch")
    if x.size == 0:
        raise ValueError("empty columns")
    return _ig_from_table(
        int((x & y).sum()), int((x & ~y).sum()), int((~x & y).sum()), int((~x & ~y).sum())
    )


def rank_and_select_features(
    candidates: Sequence[StateFeature],
    seqs: Sequence[Sequence[int]],
    labels: Sequence[int],
    top_k: int = 100,
) -> list[StateFeature]:
    """Top ``top_k`` candidates by information gain of their presence in ``seqs``.

    Ties break toward shorter states, then lexicographically.
    """
    if not candidates:
        raise ValueError("no candidate features")
    labels = np.asarray(labels).astype(bool)
    if len(seqs) != len(labels):
        raise ValueError("length mismatch")
    max_len = max(len(c.subsequence) for c in candidates)
    wanted = {c.subsequence for c in candidates}
    pos = Counter()
    neg = Counter()
    for s, lab in zip(seqs, labels):
        present = substrings(s, max_len) & wanted
        (pos if lab else neg).update(present)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    scored = []
    for c in candidates:
        n11, n10 = pos[c.subsequence], neg[c.subsequence]
        ig = _ig_from_table(n11, n10, n_pos - n11, n_neg - n10)
        scored.append(replace(c, info_gain=ig))
    scored.sort(key=lambda c: (-c.info_gain, len(c.subsequence), c.subsequence))
    return scored[:top_k]


def _occurs(seq: tuple, sub: tuple) -> bool:
    L = len(sub)
    return any(seq[i:i + L] == sub for i in range(len(seq) - L + 1))


def presence_vector(seq: Sequence[int], features: Sequence[StateFeature]) -> np.ndarray:
    seq = tuple(seq)
    return np.array([1.0 if _occurs(seq, f.subsequence) else 0.0 for f in features])


def count_vector(seq: Sequence[int], features: Sequence[StateFeature]) -> np.ndarray:
    seq = tuple(seq)
    out = []
    for f in features:
        L = len(f.subsequence)
        out.append(float(sum(seq[i:i + L] == f.subsequence for i in range(len(seq) - L + 1))))
    return np.array(out)


def feature_matrix(seqs: Iterable[Sequence[int]], features: Sequence[StateFeature], counts: bool = False) -> np.ndarray:
    fn = count_vector if counts else presence_vector
    rows = [fn(s, features) for s in seqs]
    return np.vstack(rows) if rows else np.zeros((0, len(features)))


@dataclass(frozen=True)
class KLTBasis:
    mean: np.ndarray
    components: np.ndarray  # columns are eigenvectors, descending eigenvalue
    eigenvalues: np.ndarray

    def apply(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) @ self.components


def klt_transform(X) -> tuple[np.ndarray, KLTBasis]:
    """Project centred rows onto the eigenvectors of their sample covariance."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("insufficient samples")
    mean = X.mean(axis=0)
    cov = np.cov(X - mean, rowvar=False, ddof=1).reshape(X.shape[1], X.shape[1])
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(-vals, kind="stable")
    vals = np.clip(vals[order], 0.0, None)
    vecs = vecs[:, order]
    for j in range(vecs.shape[1]):
        i = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[i, j] < 0:
            vecs[:, j] = -vecs[:, j]
    basis = KLTBasis(mean, vecs, vals)
    return basis.apply(X), basis
