"""End-to-end cascade size prediction experiment and DOT export."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .cascade import CascadeGraph, DataError, build_all, read_actions, read_follower_graph, truncate
from .classifier import MetricsReport, cross_validate_with
from .encoding import encode
from .features import (
    StateFeature,
    feature_matrix,
    klt_transform,
    rank_and_select_features,
    typical_states,
)
from .graph_metrics import BaselineFeatures, baseline_features
from .markov import InsufficientDataError, fit, select_global_order

log = logging.getLogger(__name__)

FEATURE_MODES = ("m4c", "baseline", "both")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    tau1: int = 10
    tau2: int = 20
    k: int = 10
    feature_mode: str = "both"
    max_order: int = 5
    order_rule: str = "largest"
    alpha: float = 1.0
    realization_count: int = 2000
    realization_length: int = 40
    max_states: int = 10000
    top_k: int = 100
    klt: bool = False
    counts: bool = False
    paper_mode: bool = False  # select features once on the whole balanced set
    threshold: float = 0.5
    seed: int = 0
    follower_path: str | None = None
    actions_path: str | None = None
    output_dir: str | None = None
    write_dot: bool = False

    def validate(self) -> None:
        if self.tau1 < 1:
            raise ConfigError("tau1 must be at least 1")
        if self.tau2 <= self.tau1:
            raise ConfigError("tau2 must be greater than tau1")
        if self.k < 2:
            raise ConfigError("k must be at least 2")
        if self.feature_mode not in FEATURE_MODES:
            raise ConfigError(f"feature_mode must be one of {FEATURE_MODES}")
        if self.order_rule not in ("largest", "first"):
            raise ConfigError("order_rule must be 'largest' or 'first'")
        if self.max_order < 1 or self.top_k < 1 or self.max_states < 1:
            raise ConfigError("max_order, top_k and max_states must be positive")
        if self.realization_count < 1 or self.realization_length < 1:
            raise ConfigError("realization parameters must be positive")
        if self.alpha < 0:
            raise ConfigError("alpha must be non-negative")

    @classmethod
    def from_dict(cls, d: Mapping) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json_file(cls, path: str | Path) -> ExperimentConfig:
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load config {path}: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Dataset:
    """Eligible cascades with labels from the full cascade and features from the prefix."""

    ids: list[str]
    labels: np.ndarray
    full_edges: np.ndarray
    truncated: list[CascadeGraph]
    sequences: list[tuple[int, ...]]


def prepare(cascades: Mapping[str, CascadeGraph], tau1: int, tau2: int) -> Dataset:
    ids = sorted(cid for cid, c in cascades.items() if c.n_edges >= tau1)
    labels = np.array([int(cascades[cid].n_edges >= tau2) for cid in ids], dtype=int)
    full = np.array([cascades[cid].n_edges for cid in ids], dtype=int)
    trunc = [truncate(cascades[cid], tau1) for cid in ids]
    seqs = [encode(c) for c in trunc]
    return Dataset(ids, labels, full, trunc, seqs)


def fold_seed(seed: int, fold: int) -> list[int]:
    return [int(seed), 2, int(fold)]


def select_state_features(
    seqs: Sequence[Sequence[int]], labels: Sequence[int], cfg: ExperimentConfig, seed
) -> tuple[list[StateFeature], int]:
    """Order selection, chain fit, typical-state sampling and IG ranking on one training set."""
    order = select_global_order(seqs, cfg.max_order, cfg.order_rule)
    while True:
        try:
            chain = fit(seqs, order, cfg.alpha)
            break
        except InsufficientDataError:
            if order == 1:
                raise
            order -= 1
    cands = typical_states(chain, cfg.realization_count, cfg.realization_length, cfg.max_states, seed)
    return rank_and_select_features(cands, seqs, labels, cfg.top_k), order


@dataclass
class ExperimentResult:
    m4c: MetricsReport | None
    baseline: MetricsReport | None
    selected: list[dict] = field(default_factory=list)  # per fold: order + features
    selection_members: list[list[str]] = field(default_factory=list)  # ids used for selection per fold
    test_members: list[list[str]] = field(default_factory=list)
    dataset: Dataset | None = None

    def __iter__(self):
        yield self.m4c
        yield self.baseline


def _m4c_featurizer(data: Dataset, cfg: ExperimentConfig, result: ExperimentResult):
    fold = 0
    global_cache: dict = {}

    def featurize(train_idx, test_idx):
        nonlocal fold
        if cfg.paper_mode:
            if "features" not in global_cache:
                pool = np.sort(np.concatenate([train_idx, test_idx]))
                global_cache["features"] = select_state_features(
                    [data.sequences[i] for i in pool], data.labels[pool], cfg, [int(cfg.seed), 3])
                global_cache["pool"] = pool
            feats, order = global_cache["features"]
            sel_idx = global_cache["pool"]
        else:
            feats, order = select_state_features(
                [data.sequences[i] for i in train_idx], data.labels[train_idx], cfg, fold_seed(cfg.seed, fold))
            sel_idx = train_idx
        result.selected.append({"fold": fold, "order": order, "features": [f.to_dict() for f in feats]})
        result.selection_members.append([data.ids[i] for i in sel_idx])
        result.test_members.append([data.ids[i] for i in test_idx])
        Xtr = feature_matrix([data.sequences[i] for i in train_idx], feats, cfg.counts)
        Xte = feature_matrix([data.sequences[i] for i in test_idx], feats, cfg.counts)
        fold += 1
        if cfg.klt:
            Xtr, basis = klt_transform(Xtr)
            return Xtr, basis.apply(Xte), "gaussian"
        return Xtr, Xte, "gaussian" if cfg.counts else "bernoulli"

    return featurize


def baseline_matrix(data: Dataset) -> np.ndarray:
    if not data.truncated:
        return np.zeros((0, len(BaselineFeatures.names())))
    return np.vstack([baseline_features(c).as_vector() for c in data.truncated])


def run_on_cascades(cascades: Mapping[str, CascadeGraph], cfg: ExperimentConfig) -> ExperimentResult:
    cfg.validate()
    data = prepare(cascades, cfg.tau1, cfg.tau2)
    n1 = int(data.labels.sum())
    n0 = len(data.labels) - n1
    if min(n0, n1) < cfg.k:
        raise DataError(
            f"insufficient eligible cascades (>= {cfg.tau1} edges): "
            f"class 0 has {n0}, class 1 has {n1}, need at least {cfg.k} each")
    log.info("eligible cascades: %d (class 0: %d, class 1: %d)", len(data.ids), n0, n1)
    result = ExperimentResult(None, None, dataset=data)
    if cfg.feature_mode in ("m4c", "both"):
        result.m4c = cross_validate_with(_m4c_featurizer(data, cfg, result), data.labels, cfg.k, cfg.seed, cfg.threshold)
    if cfg.feature_mode in ("baseline", "both"):
        X = baseline_matrix(data)
        result.baseline = cross_validate_with(lambda tr, te: (X[tr], X[te], "gaussian"),
                                              data.labels, cfg.k, cfg.seed, cfg.threshold)
    return result


SWEEP_COLUMNS = ("tau1", "tau2", "eligible_0", "eligible_1", "balanced_per_class", "m4c_accuracy", "baseline_accuracy")


def sweep(cascades: Mapping[str, CascadeGraph], cfg: ExperimentConfig, tau1_values: Sequence[int],
          delta: int) -> list[dict]:
    """Rerun the experiment for each ``tau1`` with ``tau2 = tau1 + delta``.

    Points without enough eligible cascades are kept with empty accuracies so
    the class sizes behind every point stay visible.
    """
    rows = []
    for t1 in tau1_values:
        point = replace(cfg, tau1=int(t1), tau2=int(t1) + int(delta))
        point.validate()
        data = prepare(cascades, point.tau1, point.tau2)
        n1 = int(data.labels.sum())
        row = {"tau1": point.tau1, "tau2": point.tau2, "eligible_0": len(data.labels) - n1, "eligible_1": n1,
               "balanced_per_class": min(n1, len(data.labels) - n1), "m4c_accuracy": None, "baseline_accuracy": None}
        try:
            res = run_on_cascades(cascades, point)
        except DataError as exc:
            log.warning("tau1=%d skipped: %s", point.tau1, exc)
        else:
            row["m4c_accuracy"] = None if res.m4c is None else res.m4c.accuracy
            row["baseline_accuracy"] = None if res.baseline is None else res.baseline.accuracy
        rows.append(row)
    return rows


def sweep_csv(rows: Sequence[Mapping]) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for r in rows:
        lines.append(",".join("" if r[c] is None else repr(r[c]) for c in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"


def load_cascades(follower_path, actions_path) -> dict[str, CascadeGraph]:
    try:
        fg = read_follower_graph(follower_path)
        groups = read_actions(actions_path)
    except OSError as exc:
        raise DataError(str(exc)) from exc
    return build_all(fg, groups)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run both prediction arms on the configured inputs and write reports if an
    output directory is set."""
    cfg.validate()
    if not cfg.follower_path or not cfg.actions_path:
        raise ConfigError("follower_path and actions_path are required")
    cascades = load_cascades(cfg.follower_path, cfg.actions_path)
    result = run_on_cascades(cascades, cfg)
    if cfg.output_dir:
        write_outputs(result, cfg, cascades)
    return result


def write_outputs(result: ExperimentResult, cfg: ExperimentConfig, cascades: Mapping[str, CascadeGraph]) -> None:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, rep in (("m4c", result.m4c), ("baseline", result.baseline)):
        if rep is None:
            continue
        (out / f"metrics_{name}.json").write_text(rep.to_json(), encoding="utf-8")
        (out / f"roc_{name}.csv").write_text(rep.roc_csv(), encoding="utf-8")
    if result.selected:
        (out / "features_selected.json").write_text(
            json.dumps({"folds": result.selected}, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    if cfg.write_dot and result.dataset is not None:
        dot_dir = out / "dot"
        dot_dir.mkdir(exist_ok=True)
        for cid, c in zip(result.dataset.ids, result.dataset.truncated):
            (dot_dir / f"{cid}.dot").write_text(export_dot(c, name=cid), encoding="utf-8")


def _dot_id(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(c: CascadeGraph, name: str = "cascade") -> str:
    """Graphviz digraph with nodes in action order and edges labelled by timestamp."""
    lines = [f"digraph {_dot_id(name)} {{"]
    lines.append(f"  {_dot_id(c.root)} [shape=doublecircle];")
    for n in c.nodes:
        if n != c.root:
            lines.append(f"  {_dot_id(n)};")
    for e in c.edges:
        lines.append(f"  {_dot_id(e.src)} -> {_dot_id(e.dst)} [label={_dot_id(e.ts)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
