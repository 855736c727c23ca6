"""Naive Bayes (Bernoulli or Gaussian), stratified cross-validation and ROC metrics."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

VAR_FLOOR = 1e-9
ROC_THRESHOLDS = 101


class DegenerateLabelsError(ValueError):
    pass


@dataclass
class TrainedModel:
    mode: str  # "bernoulli" | "gaussian"
    priors: np.ndarray  # [P(Y=0), P(Y=1)]
    # bernoulli: theta[c, i] = P(X_i = 1 | Y = c); gaussian: mean / var per class
    theta: np.ndarray | None = None
    mean: np.ndarray | None = None
    var: np.ndarray | None = None

    @property
    def arity(self) -> int:
        arr = self.theta if self.mode == "bernoulli" else self.mean
        return arr.shape[1]

    def to_dict(self) -> dict:
        d = {"mode": self.mode, "priors": self.priors.tolist(), "arity": self.arity}
        if self.mode == "bernoulli":
            d["theta"] = self.theta.tolist()
        else:
            d["mean"] = self.mean.tolist()
            d["var"] = self.var.tolist()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d) -> TrainedModel:
        arr = lambda k: np.array(d[k], dtype=float).reshape(2, -1) if k in d else None
        return cls(d["mode"], np.array(d["priors"], dtype=float), arr("theta"), arr("mean"), arr("var"))

    @classmethod
    def from_json(cls, text: str) -> TrainedModel:
        return cls.from_dict(json.loads(text))


def train(X, y, mode: str = "bernoulli") -> TrainedModel:
    """Fit class priors and per-feature class conditionals.

    Bernoulli conditionals use Laplace smoothing ``(count + 1) / (n_c + 2)``;
    Gaussian variances are floored at ``VAR_FLOOR``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be 2-D with one row per label")
    n_c = np.array([(y == 0).sum(), (y == 1).sum()])
    if (n_c == 0).any():
        raise DegenerateLabelsError("degenerate labels")
    priors = n_c / n_c.sum()
    if mode == "bernoulli":
        ones = np.vstack([(X[y == c] > 0.5).sum(axis=0) for c in (0, 1)])
        theta = (ones + 1.0) / (n_c[:, None] + 2.0)
        return TrainedModel(mode, priors, theta=theta)
    if mode == "gaussian":
        mean = np.vstack([X[y == c].mean(axis=0) for c in (0, 1)])
        var = np.vstack([X[y == c].var(axis=0) for c in (0, 1)])
        var = np.maximum(var, VAR_FLOOR)
        return TrainedModel(mode, priors, mean=mean, var=var)
    raise ValueError(f"unknown mode {mode!r}")


def log_joint(m: TrainedModel, X) -> np.ndarray:
    """Unnormalised ``log P(x, Y=c)`` for each row, shape ``(n, 2)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != m.arity:
        raise ValueError(f"arity mismatch: expected {m.arity}, got {X.shape[1]}")
    out = np.log(m.priors)[None, :].repeat(X.shape[0], axis=0)
    if m.mode == "bernoulli":
        xb = X > 0.5
        for c in (0, 1):
            lp1 = np.log(m.theta[c])
            lp0 = np.log1p(-m.theta[c])
            out[:, c] += np.where(xb, lp1, lp0).sum(axis=1)
    else:
        for c in (0, 1):
            z = (X - m.mean[c]) ** 2 / m.var[c]
            out[:, c] += -0.5 * (z + np.log(2 * math.pi * m.var[c])).sum(axis=1)
    return out


def predict_proba(m: TrainedModel, X) -> np.ndarray:
    """``P(Y=1 | x)`` for each row."""
    lj = log_joint(m, X)
    top = lj.max(axis=1, keepdims=True)
    w = np.exp(lj - top)
    return w[:, 1] / w.sum(axis=1)


def posterior(m: TrainedModel, x) -> tuple[float, float]:
    """``(P(Y=1 | x), P(Y=0 | x))`` for a single feature vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a single feature vector")
    p1 = float(predict_proba(m, x[None, :])[0])
    return p1, 1.0 - p1


# -- evaluation -------------------------------------------------------------

def confusion(y_true, p1, threshold: float = 0.5) -> dict:
    y_true = np.asarray(y_true).astype(bool)
    pred = np.asarray(p1) >= threshold
    return {
        "tp": int((pred & y_true).sum()),
        "fp": int((pred & ~y_true).sum()),
        "tn": int((~pred & ~y_true).sum()),
        "fn": int((~pred & y_true).sum()),
    }


def _ratio(a: int, b: int) -> float:
    return a / b if b else 0.0


def detection_rate(tp: int, fn: int) -> float:
    return _ratio(tp, tp + fn)


def false_positive_rate(fp: int, tn: int) -> float:
    return _ratio(fp, fp + tn)


def accuracy(tp: int, tn: int, fp: int, fn: int) -> float:
    return _ratio(tp + tn, tp + tn + fp + fn)


def roc_points(y_true, p1, n_thresholds: int = ROC_THRESHOLDS) -> list[tuple[float, float, float]]:
    """``(threshold, fpr, tpr)`` for thresholds swept from 1 down to 0."""
    pts = []
    for thr in np.linspace(1.0, 0.0, n_thresholds):
        c = confusion(y_true, p1, thr)
        pts.append((float(thr), false_positive_rate(c["fp"], c["tn"]), detection_rate(c["tp"], c["fn"])))
    return pts


@dataclass
class MetricsReport:
    tp: int
    fp: int
    tn: int
    fn: int
    roc_points: list[tuple[float, float, float]] = field(default_factory=list)
    folds: list[dict] = field(default_factory=list)
    class_sizes: dict = field(default_factory=dict)

    @property
    def detection_rate(self) -> float:
        return detection_rate(self.tp, self.fn)

    @property
    def false_positive_rate(self) -> float:
        return false_positive_rate(self.fp, self.tn)

    @property
    def accuracy(self) -> float:
        return accuracy(self.tp, self.tn, self.fp, self.fn)

    # legacy alias: the older literature calls (TP + TN) / total "precision"
    precision_paper = accuracy

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "detection_rate": self.detection_rate,
            "false_positive_rate": self.false_positive_rate,
            "accuracy": self.accuracy,
            "precision_paper": self.accuracy,
            "roc_points": [{"threshold": t, "fpr": f, "tpr": r} for t, f, r in self.roc_points],
            "folds": self.folds,
            "class_sizes": self.class_sizes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def roc_csv(self) -> str:
        lines = ["threshold,fpr,tpr"]
        lines += [f"{t!r},{f!r},{r!r}" for t, f, r in self.roc_points]
        return "\n".join(lines) + "\n"


def rebalance(y, seed) -> np.ndarray:
    """Indices of a class-balanced subset: the majority class is undersampled
    without replacement; every minority instance is kept. Returned sorted."""
    y = np.asarray(y).astype(int)
    idx0 = np.flatnonzero(y == 0)
    idx1 = np.flatnonzero(y == 1)
    if len(idx0) == 0 or len(idx1) == 0:
        raise DegenerateLabelsError("both classes must be present")
    rng = np.random.default_rng(seed)
    n = min(len(idx0), len(idx1))
    if len(idx0) > n:
        idx0 = rng.choice(idx0, size=n, replace=False)
    if len(idx1) > n:
        idx1 = rng.choice(idx1, size=n, replace=False)
    return np.sort(np.concatenate([idx0, idx1]))


def stratified_folds(y, k: int, seed) -> list[np.ndarray]:
    """Positions (into ``y``) of each test fold; every class is spread evenly."""
    y = np.asarray(y).astype(int)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for c in (0, 1):
        idx = np.flatnonzero(y == c)
        if len(idx) < k:
            raise ValueError("too few samples per fold")
        idx = idx[rng.permutation(len(idx))]
        for f, chunk in enumerate(np.array_split(idx, k)):
            folds[f].extend(chunk.tolist())
    return [np.array(sorted(f), dtype=int) for f in folds]


# featurize(train_idx, test_idx) -> (X_train, X_test, mode); indices refer to the original y
Featurizer = Callable[[np.ndarray, np.ndarray], tuple]


def cross_validate_with(
    featurize: Featurizer,
    y,
    k: int = 10,
    rebalance_seed=0,
    threshold: float = 0.5,
) -> MetricsReport:
    """Rebalance, split into stratified folds, and evaluate per-fold features.

    ``featurize`` receives the training and test indices of each fold, so
    feature selection can be confined to the training part.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    y = np.asarray(y).astype(int)
    keep = rebalance(y, rebalance_seed)
    yb = y[keep]
    folds = stratified_folds(yb, k, (rebalance_seed, 1))
    all_true, all_p = [], []
    per_fold = []
    for f, test_pos in enumerate(folds):
        train_mask = np.ones(len(keep), dtype=bool)
        train_mask[test_pos] = False
        train_idx, test_idx = keep[train_mask], keep[test_pos]
        Xtr, Xte, mode = featurize(train_idx, test_idx)
        model = train(Xtr, y[train_idx], mode)
        p1 = predict_proba(model, Xte)
        c = confusion(y[test_idx], p1, threshold)
        per_fold.append({"fold": f, "n_train": int(len(train_idx)), "n_test": int(len(test_idx)), **c,
                         "accuracy": accuracy(c["tp"], c["tn"], c["fp"], c["fn"])})
        all_true.append(y[test_idx])
        all_p.append(p1)
    yt = np.concatenate(all_true)
    pp = np.concatenate(all_p)
    tot = {key: sum(fd[key] for fd in per_fold) for key in ("tp", "fp", "tn", "fn")}
    sizes = {
        "eligible_0": int((y == 0).sum()), "eligible_1": int((y == 1).sum()),
        "balanced_per_class": int(len(keep) // 2),
    }
    return MetricsReport(**tot, roc_points=roc_points(yt, pp), folds=per_fold, class_sizes=sizes)


def cross_validate(X, y, k: int = 10, rebalance_seed=0, threshold: float = 0.5,
                   mode: str = "bernoulli") -> MetricsReport:
    X = np.asarray(X, dtype=float)
    return cross_validate_with(lambda tr, te: (X[tr], X[te], mode), y, k, rebalance_seed, threshold)
