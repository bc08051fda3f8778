"""Command-line pipeline: gen, ingest, split, train, eval, replay, bench.

Exit codes: 0 success, 2 usage or config error, 3 data error, 4 training
error. Seed sweeps run in parallel up to NEXTCELL_THREADS processes; each
run is internally deterministic, and rows are emitted in seed order.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__, configio, ingest, replay as replay_mod, seal, split as split_mod
from .errors import (ConfigError, DataFormatError, DensityError,
                     DimensionError, GraphConstructionError, InputError,
                     MetricError, NextcellError, NonFiniteError,
                     OptimizerError, SamplingError, SplitError, SubsetError,
                     ThresholdError, TrainingError)
from .graph import density
from .metrics import RESULT_COLUMNS, EvalReport, timed
from .nn.optim import load_state, save_state
from .seal import train_seal
from .synth import generate_scenario, ground_truth_next_cell, read_trace, trace_to_graph, write_trace
from .vgae import MessageGraph, TrainConfig, predict_links, train_vgae, tune_threshold

_USAGE_ERRORS = (ConfigError,)
_DATA_ERRORS = (DataFormatError, GraphConstructionError, SubsetError, SplitError,
                SamplingError, MetricError, ThresholdError, InputError, DensityError)
_TRAIN_ERRORS = (TrainingError, OptimizerError, NonFiniteError, DimensionError)

DEFAULT_SEAL_COST_LIMIT = 2_000_000.0


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _TRAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


def _build_parser():
    parser = argparse.ArgumentParser(prog="nextcell",
                                     description="GNN link prediction for "
                                                 "proactive next-cell handover")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic scenario")
    p.add_argument("--config", required=True, help="scenario config file (key = value)")
    p.add_argument("--seed", type=int, default=None, help="override rng_seed")
    p.add_argument("--graph-until", type=float, default=None,
                   help="build the graph from samples with t <= this")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("ingest", help="load and validate an edge-list dataset")
    p.add_argument("--nodes", required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--cells", type=int, default=None, help="subset cell count")
    p.add_argument("--ues", type=int, default=None, help="subset UE count")
    p.add_argument("--seed", type=int, default=0, help="subset selection seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="edge split with negative sampling")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--out", required=True, help="split manifest file")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train a link prediction model")
    p.add_argument("model", choices=("vgae", "seal"))
    p.add_argument("--data", required=True)
    p.add_argument("--split", default=None, help="existing split manifest")
    p.add_argument("--split-seed", type=int, default=None,
                   help="split the dataset now with this seed")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--seeds", default=None, help="e.g. 1..10 or 1,2,5")
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--max-epochs", type=int, default=100)
    p.add_argument("--patience", type=int, default=30)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--latent", type=int, default=16)
    p.add_argument("--kl-weight", type=float, default=None)
    p.add_argument("--weight-decay", type=float, default=0.0)
    p.add_argument("--hops", type=int, default=1)
    p.add_argument("--label-cap", type=int, default=10)
    p.add_argument("--seal-hidden", type=int, default=32)
    p.add_argument("--seal-dense", type=int, default=16)
    p.add_argument("--l2", type=float, default=1e-4, help="SEAL L2 coefficient")
    p.add_argument("--normalized-agg", action="store_true",
                   help="degree-normalize the subgraph aggregation")
    p.add_argument("--threshold-objective", choices=("f1", "mcc"), default="f1")
    p.add_argument("--cost-limit", type=float, default=DEFAULT_SEAL_COST_LIMIT,
                   help="refuse SEAL runs whose pair-count x subgraph-size "
                        "estimate exceeds this")
    p.add_argument("--force", action="store_true", help="override the cost guard")
    p.add_argument("--dataset-name", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset split")
    p.add_argument("--model", required=True, help="checkpoint file")
    p.add_argument("--data", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--dataset-name", default=None)
    p.add_argument("--out", default=None, help="append a row to this results table")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("replay", help="replay handover decisions on a trace")
    p.add_argument("--model", default=None, help="checkpoint file")
    p.add_argument("--data", default=None, help="dataset directory for the model graph")
    p.add_argument("--split", default=None, help="split manifest used at training")
    p.add_argument("--trace", required=True)
    p.add_argument("--from-t", type=float, default=None)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--window", type=float, default=5.0, help="ping-pong window (s)")
    p.add_argument("--oracle", action="store_true",
                   help="score with the true target indicator")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("bench", help="training-time scaling across graph sizes")
    p.add_argument("--config", required=True, help="base scenario config")
    p.add_argument("--scales", default="1,2,4")
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--latent", type=int, default=16)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def _dataset_paths(data_dir):
    d = Path(data_dir)
    return d / "nodes.csv", d / "edges.csv"


def _feature_scale(data_dir):
    """Manifest-declared feature scale; bare files default to unit scale."""
    manifest = Path(data_dir) / "manifest.json"
    if manifest.exists():
        return json.loads(manifest.read_text()).get("feature_scale", "unit")
    return "unit"


def _load_graph(data_dir):
    nodes, edges = _dataset_paths(data_dir)
    clamp = _feature_scale(data_dir) == "unit"
    return ingest.load_edge_list(nodes, edges, clamp_unit_range=clamp)


def cmd_gen(args):
    cfg = configio.scenario_from_file(args.config)
    if args.seed is not None:
        cfg = replace(cfg, rng_seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = configio.now_iso()

    trace = generate_scenario(cfg)
    graph_trace = trace if args.graph_until is None else trace.truncate(args.graph_until)
    g = trace_to_graph(graph_trace)

    write_trace(trace, out / "trace.csv")
    configio.write_kv(out / "trace.cfg", configio.scenario_to_mapping(cfg))
    ingest.write_graph(g, out / "nodes.csv", out / "edges.csv")

    manifest = configio.RunManifest(
        command="gen", config=configio.scenario_to_mapping(cfg), seeds=[cfg.rng_seed],
        dataset_fingerprint=configio.fingerprint_paths(
            [out / "trace.csv", out / "nodes.csv", out / "edges.csv"]),
        started_at=started, finished_at=configio.now_iso(),
        outputs={"trace": "trace.csv", "nodes": "nodes.csv", "edges": "edges.csv"},
        feature_scale="radio")
    manifest.write(out / "manifest.json")
    print(f"wrote {out}/trace.csv ({len(trace)} samples), nodes={g.n_nodes}, "
          f"edges={g.n_edges}, density={density(g):.5f}")
    return 0


def cmd_ingest(args):
    if (args.cells is None) != (args.ues is None):
        raise ConfigError("subset needs both --cells and --ues")
    scale = _feature_scale(Path(args.nodes).parent)
    g = ingest.load_edge_list(args.nodes, args.edges,
                              clamp_unit_range=scale == "unit")
    started = configio.now_iso()
    if args.cells is not None:
        g = ingest.extract_subset(g, ingest.SubsetSpec(args.cells, args.ues, args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ingest.write_graph(g, out / "nodes.csv", out / "edges.csv")
    manifest = configio.RunManifest(
        command="ingest",
        config={"nodes": str(args.nodes), "edges": str(args.edges),
                "cells": str(args.cells), "ues": str(args.ues)},
        seeds=[args.seed],
        dataset_fingerprint=configio.fingerprint_paths([out / "nodes.csv", out / "edges.csv"]),
        started_at=started, finished_at=configio.now_iso(),
        outputs={"nodes": "nodes.csv", "edges": "edges.csv"},
        feature_scale=scale)
    manifest.write(out / "manifest.json")
    print(f"nodes={g.n_nodes} (ue={g.n_ue}, cell={g.n_cells}), edges={g.n_edges}, "
          f"density={density(g):.5f}")
    return 0


def cmd_split(args):
    g = _load_graph(args.data)
    try:
        ratios = tuple(float(x) for x in args.ratios.split(","))
    except ValueError:
        raise ConfigError(f"cannot parse ratios {args.ratios!r}") from None
    started = configio.now_iso()
    bundle = split_mod.make_split(g, ratios=ratios, seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    split_mod.save_manifest(bundle, out)
    manifest = configio.RunManifest(
        command="split", config={"data": str(args.data), "ratios": args.ratios},
        seeds=[args.seed],
        dataset_fingerprint=configio.fingerprint_paths([out]),
        started_at=started, finished_at=configio.now_iso(),
        outputs={"split": out.name})
    manifest.write(out.with_suffix(out.suffix + ".manifest.json"))
    print(f"split: train={len(bundle.train_pos)} val={len(bundle.val_pos)} "
          f"test={len(bundle.test_pos)} (negatives matched 1:1)")
    return 0


def _parse_seeds(args):
    if args.seeds and args.seed is not None:
        raise ConfigError("give either --seed or --seeds, not both")
    if args.seeds:
        text = args.seeds.strip()
        if ".." in text:
            lo, hi = text.split("..", 1)
            try:
                return list(range(int(lo), int(hi) + 1))
            except ValueError:
                raise ConfigError(f"cannot parse seed range {text!r}") from None
        try:
            return [int(x) for x in text.split(",")]
        except ValueError:
            raise ConfigError(f"cannot parse seeds {text!r}") from None
    return [args.seed if args.seed is not None else 0]


def _train_config(args, seed):
    return TrainConfig(
        lr=args.lr, max_epochs=args.max_epochs, patience=args.patience,
        kl_weight=args.kl_weight, weight_decay=args.weight_decay, seed=seed,
        hidden=args.hidden, latent=args.latent,
        threshold_objective=args.threshold_objective,
        hops=args.hops, label_cap=args.label_cap, seal_hidden=args.seal_hidden,
        seal_dense=args.seal_dense, seal_l2=args.l2,
        normalized_agg=args.normalized_agg)


def _get_bundle(g, split_file, split_seed):
    if (split_file is None) == (split_seed is None):
        raise ConfigError("give exactly one of --split or --split-seed")
    if split_file is not None:
        return split_mod.load_manifest(split_file)
    return split_mod.make_split(g, seed=split_seed)


def _write_curve(curve, path):
    with open(path, "w") as fh:
        fh.write("epoch,loss,auc,ap\n")
        for row in curve:
            fh.write(f"{row['epoch']},{row['loss']:.6g},"
                     f"{row['val_auc']:.6g},{row['val_ap']:.6g}\n")


def _append_results(path, rows):
    path = Path(path)
    fresh = not path.exists()
    with open(path, "a") as fh:
        if fresh:
            fh.write(",".join(RESULT_COLUMNS) + "\n")
        for row in rows:
            fh.write(row + "\n")


def _train_one(payload):
    """One seeded training run; module-level so seed sweeps can fork."""
    args_ns = argparse.Namespace(**payload["args"])
    seed = payload["seed"]
    g = _load_graph(args_ns.data)
    bundle = _get_bundle(g, args_ns.split, args_ns.split_seed)
    cfg = _train_config(args_ns, seed)
    model = payload["model"]
    out = Path(payload["out"])

    val_pairs = np.vstack([bundle.val_pos, bundle.val_neg])
    val_labels = np.concatenate([np.ones(len(bundle.val_pos)),
                                 np.zeros(len(bundle.val_neg))])
    test_pairs = np.vstack([bundle.test_pos, bundle.test_neg])
    test_labels = np.concatenate([np.ones(len(bundle.test_pos)),
                                  np.zeros(len(bundle.test_neg))])

    if model == "vgae":
        (state, curve), train_s = timed(train_vgae, g, bundle, cfg)
        mg = MessageGraph(g, bundle.message_edges)
        val_scores = predict_links(state, mg, val_pairs)
        test_scores, infer_s = timed(predict_links, state, mg, test_pairs)
    else:
        n_pairs = sum(len(s) for s in bundle.sets().values())
        estimate = seal.estimate_cost(g, bundle.message_edges, n_pairs, hops=cfg.hops)
        if estimate > payload["cost_limit"] and not payload["force"]:
            raise TrainingError(
                f"subgraph workload estimate {estimate:.3g} (pairs x mean subgraph "
                f"size) exceeds the limit {payload['cost_limit']:.3g}; "
                f"rerun with --force to attempt it anyway")
        (state, curve), train_s = timed(train_seal, g, bundle, cfg)
        val_scores = seal.predict_pairs(state, g, bundle.message_edges, val_pairs, cfg)
        test_scores, infer_s = timed(seal.predict_pairs, state, g,
                                     bundle.message_edges, test_pairs, cfg)

    threshold = tune_threshold(val_scores, val_labels, grid=cfg.threshold_grid,
                               objective=cfg.threshold_objective)
    report = EvalReport.from_scores(test_scores, test_labels, threshold,
                                    train_time_s=train_s, infer_time_s=infer_s,
                                    epochs_run=len(curve))
    ckpt = out / f"ckpt_{model}_s{seed}.npz"
    meta = {"model": model, "seed": seed, "n_nodes": g.n_nodes,
            "feature_dim": g.feature_matrix().shape[1],
            "config": {k: v for k, v in asdict(cfg).items() if k != "threshold_grid"},
            "threshold": threshold,
            "dataset": payload["dataset"]}
    save_state(ckpt, state, meta=meta)
    _write_curve(curve, out / f"curve_{model}_s{seed}.csv")
    return {"seed": seed, "report": report,
            "row": report.to_row(model, payload["dataset"], seed)}


def cmd_train(args):
    seeds = _parse_seeds(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = configio.now_iso()
    dataset = args.dataset_name or Path(args.data).name

    payloads = [{
        "args": vars(args) | {"func": None}, "seed": seed, "model": args.model,
        "out": str(out), "dataset": dataset, "cost_limit": args.cost_limit,
        "force": args.force,
    } for seed in seeds]
    for p in payloads:
        p["args"] = {k: v for k, v in p["args"].items() if k != "func"}

    threads = max(int(os.environ.get("NEXTCELL_THREADS", "1")), 1)
    if threads > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_train_one, payloads))
    else:
        results = [_train_one(p) for p in payloads]

    results.sort(key=lambda r: r["seed"])
    rows = [r["row"] for r in results]
    if len(results) > 1:
        mean = _mean_report([r["report"] for r in results])
        rows.append(mean.to_row(args.model, dataset, "mean"))
    _append_results(out / "results.csv", rows)

    nodes_f, edges_f = _dataset_paths(args.data)
    manifest = configio.RunManifest(
        command=f"train {args.model}",
        config={k: str(v) for k, v in vars(args).items() if k != "func"},
        seeds=seeds,
        dataset_fingerprint=configio.fingerprint_paths([nodes_f, edges_f]),
        started_at=started, finished_at=configio.now_iso(),
        outputs={"results": "results.csv"})
    manifest.write(out / "manifest.json")
    for row in rows:
        print(row)
    return 0


def _mean_report(reports):
    def avg(name):
        return float(np.mean([getattr(r, name) for r in reports]))

    return EvalReport(
        auc=avg("auc"), ap=avg("ap"), precision=avg("precision"),
        recall=avg("recall"), f1=avg("f1"), accuracy=avg("accuracy"),
        mcc=avg("mcc"), threshold=avg("threshold"),
        tp=int(round(avg("tp"))), fp=int(round(avg("fp"))),
        tn=int(round(avg("tn"))), fn=int(round(avg("fn"))),
        train_time_s=avg("train_time_s"), infer_time_s=avg("infer_time_s"),
        epochs_run=int(round(avg("epochs_run"))))


def _check_compat(meta, g):
    if meta.get("n_nodes") != g.n_nodes:
        raise DataFormatError(f"checkpoint expects {meta.get('n_nodes')} nodes, "
                              f"dataset has {g.n_nodes}")
    if meta.get("feature_dim") != g.feature_matrix().shape[1]:
        raise DataFormatError(
            f"checkpoint expects feature width {meta.get('feature_dim')}, "
            f"dataset has {g.feature_matrix().shape[1]}")


def cmd_eval(args):
    state, meta = load_state(args.model)
    g = _load_graph(args.data)
    _check_compat(meta, g)
    bundle = split_mod.load_manifest(args.split)
    cfg = TrainConfig(**meta["config"])

    val_pairs = np.vstack([bundle.val_pos, bundle.val_neg])
    val_labels = np.concatenate([np.ones(len(bundle.val_pos)),
                                 np.zeros(len(bundle.val_neg))])
    test_pairs = np.vstack([bundle.test_pos, bundle.test_neg])
    test_labels = np.concatenate([np.ones(len(bundle.test_pos)),
                                  np.zeros(len(bundle.test_neg))])

    if meta["model"] == "vgae":
        mg = MessageGraph(g, bundle.message_edges)
        val_scores = predict_links(state, mg, val_pairs)
        test_scores, infer_s = timed(predict_links, state, mg, test_pairs)
    else:
        val_scores = seal.predict_pairs(state, g, bundle.message_edges, val_pairs, cfg)
        test_scores, infer_s = timed(seal.predict_pairs, state, g,
                                     bundle.message_edges, test_pairs, cfg)
    threshold = tune_threshold(val_scores, val_labels,
                               objective=cfg.threshold_objective)
    report = EvalReport.from_scores(test_scores, test_labels, threshold,
                                    infer_time_s=infer_s)
    print(report.to_text(), end="")
    if args.out:
        dataset = args.dataset_name or Path(args.data).name
        _append_results(args.out, [report.to_row(meta["model"], dataset,
                                                 meta.get("seed", ""))])
    return 0


def cmd_replay(args):
    trace = read_trace(args.trace)
    truth = ground_truth_next_cell(trace)
    if args.oracle:
        scorer = replay_mod.OracleScorer()
    else:
        if not args.model or not args.data:
            raise ConfigError("replay needs --model and --data unless --oracle is set")
        state, meta = load_state(args.model)
        if meta.get("model") != "vgae":
            raise ConfigError("replay scoring supports vgae checkpoints (or --oracle)")
        g = _load_graph(args.data)
        _check_compat(meta, g)
        message_pairs = None
        if args.split:
            message_pairs = split_mod.load_manifest(args.split).message_edges
        scorer = replay_mod.VgaeLinkScorer(state, g, message_pairs)

    cfg = replay_mod.ReplayConfig(threshold=args.threshold,
                                  pingpong_window_s=args.window)
    report, events = replay_mod.replay(trace, truth, scorer, cfg, from_t=args.from_t)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    replay_mod.write_events(events, out / "events.csv")
    (out / "replay.txt").write_text(report.to_text())
    baseline = replay_mod.baseline_next_cell(
        [e for e in truth if args.from_t is None or e.t >= args.from_t])
    print(report.to_text(), end="")
    print(f"baseline_majority_accuracy = {baseline:.6g}")
    return 0


def cmd_bench(args):
    base = configio.scenario_from_file(args.config)
    try:
        scales = [int(s) for s in args.scales.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse scales {args.scales!r}") from None
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    started = configio.now_iso()

    rows = []
    for scale in scales:
        cfg = replace(base, n_cells=base.n_cells * scale, n_ues=base.n_ues * scale,
                      area_m=base.area_m * np.sqrt(scale), rng_seed=args.seed)
        trace = generate_scenario(cfg)
        g = trace_to_graph(trace)
        bundle = split_mod.make_split(g, seed=args.seed)
        tc = TrainConfig(max_epochs=args.epochs, patience=args.epochs - 1,
                         seed=args.seed, hidden=args.hidden, latent=args.latent)
        train_times = []
        infer_times = []
        for _ in range(max(args.repeats, 1)):
            (state, curve), train_s = timed(train_vgae, g, bundle, tc)
            mg = MessageGraph(g, bundle.message_edges)
            pairs = np.vstack([bundle.test_pos, bundle.test_neg])
            _, infer_s = timed(predict_links, state, mg, pairs)
            train_times.append(train_s)
            infer_times.append(infer_s)
        rows.append((scale, g.n_nodes, g.n_edges, len(curve),
                     min(train_times), min(infer_times)))

    with open(out, "w") as fh:
        fh.write("scale,nodes,edges,epochs,train_s,infer_s\n")
        for row in rows:
            fh.write(f"{row[0]},{row[1]},{row[2]},{row[3]},"
                     f"{row[4]:.6g},{row[5]:.6g}\n")
    manifest = configio.RunManifest(
        command="bench", config={"config": args.config, "scales": args.scales,
                                 "epochs": str(args.epochs)},
        seeds=[args.seed], dataset_fingerprint=configio.fingerprint_paths([out]),
        started_at=started, finished_at=configio.now_iso(),
        outputs={"table": out.name})
    manifest.write(out.with_suffix(out.suffix + ".manifest.json"))
    for row in rows:
        print(f"scale={row[0]} nodes={row[1]} edges={row[2]} epochs={row[3]} "
              f"train_s={row[4]:.4g} infer_s={row[5]:.4g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
