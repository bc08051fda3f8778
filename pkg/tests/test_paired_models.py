"""Paired model comparisons mirroring the reported directional results."""

import numpy as np
import pytest

from helpers import rw_shaped_graph

from nextcell.metrics import auc, thresholded_metrics, timed
from nextcell.seal import predict_pairs, train_seal
from nextcell.split import make_split
from nextcell.vgae import (MessageGraph, TrainConfig, predict_links, train_vgae,
                           tune_threshold)


def _eval_pair(g, bundle, cfg):
    vp = np.vstack([bundle.val_pos, bundle.val_neg])
    vl = np.concatenate([np.ones(len(bundle.val_pos)), np.zeros(len(bundle.val_neg))])
    tp = np.vstack([bundle.test_pos, bundle.test_neg])
    tl = np.concatenate([np.ones(len(bundle.test_pos)), np.zeros(len(bundle.test_neg))])

    vgae_state, _ = train_vgae(g, bundle, cfg)
    mg = MessageGraph(g, bundle.message_edges)
    thr_v = tune_threshold(predict_links(vgae_state, mg, vp), vl)
    vgae_m = thresholded_metrics(predict_links(vgae_state, mg, tp), tl, thr_v)

    seal_state, _ = train_seal(g, bundle, cfg)
    seal_val = predict_pairs(seal_state, g, bundle.message_edges, vp, cfg)
    thr_s = tune_threshold(seal_val, vl)
    seal_m = thresholded_metrics(
        predict_pairs(seal_state, g, bundle.message_edges, tp, cfg), tl, thr_s)
    return vgae_m, seal_m


def test_rw_shaped_seal_beats_vgae_precision():
    """Sparse anonymized-style data: the subgraph classifier is the more
    FP-resistant model, so its precision comes out ahead (paired run,
    mean over 5 split/train seeds, direction only)."""
    g = rw_shaped_graph()
    seal_prec = []
    vgae_prec = []
    for seed in range(1, 6):
        bundle = make_split(g, seed=seed)
        vgae_m, seal_m = _eval_pair(g, bundle, TrainConfig(seed=seed))
        seal_prec.append(seal_m.precision)
        vgae_prec.append(vgae_m.precision)
    assert np.mean(seal_prec) >= np.mean(vgae_prec)


def test_em_vgae_trains_faster_than_seal(em_graph, em_bundle):
    cfg = TrainConfig(seed=1)
    (_, _), vgae_s = timed(train_vgae, em_graph, em_bundle, cfg)
    (_, _), seal_s = timed(train_seal, em_graph, em_bundle, cfg)
    assert vgae_s < seal_s


def test_vgae_rerun_consistency(em_graph, em_bundle):
    """Recomputing validation scores reproduces the logged best value
    exactly; the held-out test AUC lands near it on this seed."""
    cfg = TrainConfig(seed=1)
    state, curve = train_vgae(em_graph, em_bundle, cfg)
    best_val = max(c["val_auc"] for c in curve)
    mg = MessageGraph(em_graph, em_bundle.message_edges)
    vp = np.vstack([em_bundle.val_pos, em_bundle.val_neg])
    vl = np.concatenate([np.ones(len(em_bundle.val_pos)),
                         np.zeros(len(em_bundle.val_neg))])
    recomputed = auc(predict_links(state, mg, vp), vl)
    assert abs(recomputed - best_val) < 1e-12

    tp = np.vstack([em_bundle.test_pos, em_bundle.test_neg])
    tl = np.concatenate([np.ones(len(em_bundle.test_pos)),
                         np.zeros(len(em_bundle.test_neg))])
    test_auc = auc(predict_links(state, mg, tp), tl)
    assert abs(test_auc - best_val) <= 0.05


def test_random_scores_are_chance_and_untrained_trails_trained(em_graph, em_bundle):
    """Random scores sit at AUC 0.5. An untrained encoder lands above that
    (even random aggregation encodes neighborhood overlap) but well below a
    trained one, which is the gap evaluation must expose."""
    tp = np.vstack([em_bundle.test_pos, em_bundle.test_neg])
    tl = np.concatenate([np.ones(len(em_bundle.test_pos)),
                         np.zeros(len(em_bundle.test_neg))])
    rng = np.random.default_rng(0)
    rand_aucs = [auc(rng.random(len(tl)), tl) for _ in range(20)]
    assert abs(np.mean(rand_aucs) - 0.5) < 0.1

    from nextcell.vgae import init_vgae_state
    mg = MessageGraph(em_graph, em_bundle.message_edges)
    untrained = np.mean([
        auc(predict_links(init_vgae_state(mg.feature_dim, mg.edge_dim, 32, 16,
                                          seed=s), mg, tp), tl)
        for s in range(5)])
    trained_state, _ = train_vgae(em_graph, em_bundle, TrainConfig(seed=1))
    trained = auc(predict_links(trained_state, mg, tp), tl)
    assert untrained < trained
    assert trained - untrained > 0.1
