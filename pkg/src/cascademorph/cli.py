"""Command-line entry point: ``cascademorph <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path

from .cascade import DataError, truncate, write_actions, write_follower_graph
from .encoding import bits_to_str, dfs_encode, encode
from .features import feature_matrix
from .markov import InsufficientDataError, fit, select_global_order
from .pipeline import (
    ConfigError,
    ExperimentConfig,
    export_dot,
    load_cascades,
    prepare,
    run_on_cascades,
    select_state_features,
    sweep,
    sweep_csv,
    write_outputs,
)
from .synth import GeneratorConfig, generate

EXIT_CONFIG = 2
EXIT_DATA = 3

log = logging.getLogger("cascademorph")


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {s!r}")


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {s!r}") from exc


_FLAG_TYPES = {int: int, float: float, bool: _bool, str: str, "int": int, "float": float, "bool": _bool, "str": str}


def _add_config_flags(p: argparse.ArgumentParser, skip=()) -> None:
    """One ``--field-name`` flag per ExperimentConfig field; unset flags stay None."""
    for f in fields(ExperimentConfig):
        if f.name in skip:
            continue
        kind = f.type if f.type in _FLAG_TYPES else str(f.type).split(" ")[0]
        conv = _FLAG_TYPES.get(kind, str)
        p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=conv, default=None,
                       metavar=f.name.upper())
    p.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")


def _experiment_config(args) -> ExperimentConfig:
    base = ExperimentConfig.from_json_file(args.config).to_dict() if args.config else {}
    for f in fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            base[f.name] = v
    try:
        cfg = ExperimentConfig.from_dict(base)
        cfg.validate()
    except TypeError as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc
    return cfg


def _require_inputs(cfg: ExperimentConfig):
    if not cfg.follower_path or not cfg.actions_path:
        raise ConfigError("--follower-path and --actions-path are required")
    return load_cascades(cfg.follower_path, cfg.actions_path)


# -- subcommands -------------------------------------------------------------

def cmd_generate(args) -> int:
    base = {}
    if args.generator_config:
        try:
            base = json.loads(Path(args.generator_config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load generator config: {exc}") from exc
    base["seed"] = args.seed
    if args.cascade_count is not None:
        base["cascade_count"] = args.cascade_count
    if args.user_count is not None:
        base["user_count"] = args.user_count
    try:
        gcfg = GeneratorConfig.from_dict({**GeneratorConfig().to_dict(), **base})
        gcfg.validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid generator config: {exc}") from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus = generate(gcfg)
    write_follower_graph(corpus.follower_graph, out / "followers.tsv")
    write_actions(corpus.events, out / "actions.jsonl")
    lines = ["cascade_id,label,final_edge_count"]
    lines += [f"{cid},{corpus.labels[cid]},{corpus.final_edges[cid]}" for cid in sorted(corpus.labels)]
    (out / "labels.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (out / "generator_config.json").write_text(json.dumps(gcfg.to_dict(), sort_keys=True, indent=1) + "\n",
                                               encoding="utf-8")
    print(f"wrote {len(corpus.labels)} cascades over {len(corpus.follower_graph.nodes)} users to {out}")
    return 0


def cmd_construct(args) -> int:
    cfg = _experiment_config(args)
    cascades = _require_inputs(cfg)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for cid in sorted(cascades):
            c = cascades[cid]
            if args.truncate:
                c = truncate(c, cfg.tau1)
            out.write(json.dumps({"cascade_id": cid, **c.to_dict()}, sort_keys=True) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_encode(args) -> int:
    cfg = _experiment_config(args)
    cascades = _require_inputs(cfg)
    for cid in sorted(cascades):
        c = cascades[cid]
        if args.truncate:
            c = truncate(c, cfg.tau1)
        bits = dfs_encode(c)
        runs = encode(c)
        print(f"{cid}\t{bits_to_str(bits)}\t{','.join(map(str, runs))}")
    return 0


def cmd_fit(args) -> int:
    cfg = _experiment_config(args)
    data = prepare(_require_inputs(cfg), cfg.tau1, cfg.tau2)
    if not data.sequences:
        raise DataError(f"no cascade has at least {cfg.tau1} edges")
    order = args.order or select_global_order(data.sequences, cfg.max_order, cfg.order_rule)
    try:
        chain = fit(data.sequences, order, cfg.alpha)
    except InsufficientDataError as exc:
        raise DataError(str(exc)) from exc
    text = chain.to_json() + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_features(args) -> int:
    """Select features on all eligible cascades and write the matrix (exploration, not evaluation)."""
    cfg = _experiment_config(args)
    if not cfg.output_dir:
        raise ConfigError("--output-dir is required")
    data = prepare(_require_inputs(cfg), cfg.tau1, cfg.tau2)
    if len(set(data.labels.tolist())) < 2:
        raise DataError("feature selection needs eligible cascades of both classes")
    try:
        feats, order = select_state_features(data.sequences, data.labels, cfg, [cfg.seed, 3])
    except InsufficientDataError as exc:
        raise DataError(str(exc)) from exc
    X = feature_matrix(data.sequences, feats, cfg.counts)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = ["cascade_id", "label"] + [f"f{i + 1}" for i in range(len(feats))]
    lines = [",".join(header)]
    for cid, lab, row in zip(data.ids, data.labels, X):
        lines.append(",".join([cid, str(int(lab))] + [f"{v:g}" for v in row]))
    (out / "features.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    manifest = {"order": order, "features": [f.to_dict() for f in feats]}
    (out / "features_selected.json").write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n",
                                                encoding="utf-8")
    print(f"{len(data.ids)} cascades, order {order}, {len(feats)} features -> {out}")
    return 0


def cmd_evaluate(args) -> int:
    args.seed = args.seed_required
    cfg = _experiment_config(args)
    cascades = _require_inputs(cfg)
    result = run_on_cascades(cascades, cfg)
    if cfg.output_dir:
        write_outputs(result, cfg, cascades)
    for name, rep in (("m4c", result.m4c), ("baseline", result.baseline)):
        if rep is not None:
            print(f"{name}\taccuracy={rep.accuracy:.4f}\tdetection_rate={rep.detection_rate:.4f}"
                  f"\tfalse_positive_rate={rep.false_positive_rate:.4f}")
    if args.sweep_tau1:
        rows = sweep(cascades, cfg, args.sweep_tau1, args.sweep_delta or (cfg.tau2 - cfg.tau1))
        text = sweep_csv(rows)
        if cfg.output_dir:
            (Path(cfg.output_dir) / "sweep.csv").write_text(text, encoding="utf-8")
        sys.stdout.write(text)
    return 0


def cmd_export_dot(args) -> int:
    cfg = _experiment_config(args)
    cascades = _require_inputs(cfg)
    ids = args.cascade_id or sorted(cascades)
    missing = [cid for cid in ids if cid not in cascades]
    if missing:
        raise DataError(f"unknown cascade ids: {missing}")
    out = Path(cfg.output_dir) if cfg.output_dir else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    for cid in ids:
        c = truncate(cascades[cid], cfg.tau1) if args.truncate else cascades[cid]
        text = export_dot(c, name=cid)
        if out:
            (out / f"{cid}.dot").write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cascademorph", description="Cascade morphology encoding and size prediction.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic follower graph and action log")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--generator-config", help="JSON file with generator fields")
    p.add_argument("--cascade-count", type=int, help="cascades per regime")
    p.add_argument("--user-count", type=int)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("construct", help="rebuild cascade graphs from the inputs as JSON lines")
    _add_config_flags(p)
    p.add_argument("--truncate", action="store_true", help="keep only the first tau1 edges")
    p.add_argument("--out")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("encode", help="print cascade_id, binary code and run lengths")
    _add_config_flags(p)
    p.add_argument("--truncate", action="store_true", help="encode the first tau1 edges only")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("fit", help="fit a Markov chain to the truncated run-length sequences")
    _add_config_flags(p)
    p.add_argument("--order", type=int, help="chain order (default: autocorrelation selection)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("features", help="select state features and write the feature matrix")
    _add_config_flags(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("evaluate", help="cross-validate the M4C and baseline predictors")
    _add_config_flags(p, skip=("seed",))
    p.add_argument("--seed", dest="seed_required", type=int, required=True)
    p.add_argument("--sweep-tau1", type=_int_list, help="comma-separated tau1 values to sweep")
    p.add_argument("--sweep-delta", type=int, help="tau2 - tau1 during the sweep")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("export-dot", help="write Graphviz files for cascades")
    _add_config_flags(p)
    p.add_argument("--cascade-id", action="append", help="repeatable; default all")
    p.add_argument("--truncate", action="store_true")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BrokenPipeError:
        # downstream closed early (e.g. `| head`); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
