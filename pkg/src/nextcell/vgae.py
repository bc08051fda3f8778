"""Variational graph autoencoder with an attention front end.

One attention layer aggregates node and edge features over the training
adjacency, two degree-normalized linear heads produce the latent mean and
log standard deviation, and an inner product decoder scores node pairs.
The heads stay linear: a rectifier there would pin the mean nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NonFiniteError, ThresholdError, TrainingError
from .graph import normalize_csr, undirected_csr
from .metrics import auc, average_precision, thresholded_metrics
from .nn.layers import gat_layer, gcn_layer, inner_product_decode
from .nn.losses import bce, kl_divergence
from .nn.optim import ModelState, adam_step
from .nn.tensor import Tape, Tensor, add, clip, exp, mul, relu

LOGSTD_CLAMP = 10.0

DEFAULT_THRESHOLD_GRID = tuple(np.round(np.linspace(0.05, 0.95, 19), 2))


@dataclass
class TrainConfig:
    lr: float = 0.05
    max_epochs: int = 100
    patience: int = 30
    kl_weight: float | None = None  # None -> 1 / n_nodes
    weight_decay: float = 0.0
    seed: int = 0
    hidden: int = 32
    latent: int = 16
    threshold_grid: tuple = DEFAULT_THRESHOLD_GRID
    threshold_objective: str = "f1"  # or "mcc"
    # subgraph-classifier knobs
    hops: int = 1
    label_cap: int = 10
    seal_hidden: int = 32
    seal_dense: int = 16
    seal_l2: float = 1e-4
    normalized_agg: bool = False

    def validate(self):
        if self.max_epochs < 1:
            raise TrainingError("max_epochs must be positive")
        if not 0 <= self.patience < self.max_epochs:
            raise TrainingError("patience must be in [0, max_epochs)")
        for name in ("hidden", "latent", "seal_hidden", "seal_dense"):
            if getattr(self, name) < 1:
                raise TrainingError(f"{name} must be positive")
        return self


def standardize(x):
    """Column z-scores with constant columns mapped to zero."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return x.copy(), np.zeros(x.shape[-1] if x.ndim else 0), np.ones(x.shape[-1] if x.ndim else 0)
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    sd_safe = np.where(sd > 0, sd, 1.0)
    return (x - mu) / sd_safe, mu, sd_safe


class MessageGraph:
    """Training-time view of a graph restricted to its message edges.

    Holds standardized node/edge features, the normalized adjacency over
    the message edges, and directed (both-ways) message arrays for the
    attention layer.
    """

    def __init__(self, g, message_pairs=None):
        pairs = g.edge_pairs() if message_pairs is None else \
            np.asarray(message_pairs, dtype=np.int64).reshape(-1, 2)
        self.n = g.n_nodes
        self.x, self.node_mu, self.node_sd = standardize(g.feature_matrix())

        feat_map = g.edge_feature_map()
        edge_dim = next(iter(feat_map.values())).shape[0] if feat_map else 1
        raw_ef = np.zeros((pairs.shape[0], edge_dim))
        for i, (u, c) in enumerate(pairs):
            f = feat_map.get((int(u), int(c)))
            if f is not None:
                raw_ef[i] = f
        self.efeat, self.edge_mu, self.edge_sd = standardize(raw_ef)

        self.edge_index = np.concatenate(
            [np.stack([pairs[:, 0], pairs[:, 1]]),
             np.stack([pairs[:, 1], pairs[:, 0]])], axis=1)
        self.efeat_directed = np.vstack([self.efeat, self.efeat])

        self.message_csr = undirected_csr(self.n, pairs)
        self.a_hat = normalize_csr(self.message_csr)

    @property
    def feature_dim(self):
        return self.x.shape[1]

    @property
    def edge_dim(self):
        return self.efeat.shape[1]


def init_vgae_state(feature_dim, edge_dim, hidden, latent, seed):
    """Glorot-uniform attention and head weights under one seed."""
    rng = np.random.default_rng([seed, 11])

    def glorot(n_in, n_out):
        limit = np.sqrt(6.0 / (n_in + n_out))
        return rng.uniform(-limit, limit, size=(n_in, n_out))

    return ModelState({
        "gat_w": glorot(feature_dim, hidden),
        "gat_we": glorot(edge_dim, hidden),
        "gat_a": glorot(3 * hidden, 1),
        "mu_w": glorot(hidden, latent),
        "logstd_w": glorot(hidden, latent),
    })


def encode(mg, state, sample=False, eps=None, seed=0):
    """Latent (Z, mu, logstd) for every node.

    With sample=False, Z is the mean path and fully deterministic. With
    sample=True, Z = mu + exp(logstd) * eps with eps ~ N(0, I) taken from
    `eps` or drawn from `seed`.
    """
    h = gat_layer(Tensor(mg.x), mg.edge_index, mg.efeat_directed,
                  state["gat_w"], state["gat_we"], state["gat_a"])
    h = relu(h)
    mu = gcn_layer(h, mg.a_hat, state["mu_w"], activation="linear")
    logstd = clip(gcn_layer(h, mg.a_hat, state["logstd_w"], activation="linear"),
                  -LOGSTD_CLAMP, LOGSTD_CLAMP)
    if not sample:
        return mu, mu, logstd
    if eps is None:
        eps = np.random.default_rng(seed).standard_normal(mu.data.shape)
    z = add(mu, mul(exp(logstd), eps))
    return z, mu, logstd


def _pairs_and_labels(pos, neg):
    pairs = np.vstack([pos, neg])
    labels = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    return pairs, labels


def train_vgae(g, bundle, cfg):
    """Train on the bundle's message edges; returns (state, curve).

    The loss is reconstruction BCE over train positives and negatives plus
    the weighted KL term. Early stopping watches validation AUC; the
    returned parameters are the best-on-validation snapshot. Curve rows are
    dicts with epoch, loss, val_auc, val_ap.
    """
    cfg.validate()
    mg = MessageGraph(g, bundle.message_edges)
    state = init_vgae_state(mg.feature_dim, mg.edge_dim, cfg.hidden, cfg.latent, cfg.seed)
    kl_weight = cfg.kl_weight if cfg.kl_weight is not None else 1.0 / max(mg.n, 1)
    rng = np.random.default_rng([cfg.seed, 23])

    train_pairs, train_labels = _pairs_and_labels(bundle.train_pos, bundle.train_neg)
    val_pairs, val_labels = _pairs_and_labels(bundle.val_pos, bundle.val_neg)

    curve = []
    best_auc = -np.inf
    best_snap = state.snapshot()
    wait = 0
    for epoch in range(cfg.max_epochs):
        eps = rng.standard_normal((mg.n, cfg.latent))
        try:
            with Tape() as tape:
                z, mu, logstd = encode(mg, state, sample=True, eps=eps)
                probs = inner_product_decode(z, train_pairs)
                loss = add(bce(probs, train_labels),
                           mul(kl_divergence(mu, logstd), kl_weight))
            tape.backward(loss)
        except NonFiniteError as exc:
            raise TrainingError(f"training diverged at epoch {epoch}: {exc}") from exc
        grads = {name: state[name].grad for name in state.names()}
        adam_step(state, grads, cfg.lr, weight_decay=cfg.weight_decay)

        val_scores = predict_links(state, mg, val_pairs)
        val_auc = auc(val_scores, val_labels)
        val_ap = average_precision(val_scores, val_labels)
        curve.append({"epoch": epoch, "loss": loss.item(),
                      "val_auc": val_auc, "val_ap": val_ap})

        if val_auc > best_auc:
            best_auc = val_auc
            best_snap = state.snapshot()
            wait = 0
        else:
            wait += 1
            if wait > cfg.patience:
                break

    state.restore(best_snap)
    return state, curve


def predict_links(state, mg, pairs):
    """Mean-path probabilities for the given node pairs."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.size and (pairs.min() < 0 or pairs.max() >= mg.n):
        raise InputError(f"pair index out of range for {mg.n} nodes")
    z, _, _ = encode(mg, state, sample=False)
    return inner_product_decode(z, pairs).data.copy()


def tune_threshold(scores, labels, grid=None, objective="f1"):
    """Grid threshold maximizing validation F1 (or MCC); ties move to 0.5."""
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel().astype(np.int64)
    if len(np.unique(y)) < 2:
        raise ThresholdError("threshold tuning needs both classes in the labels")
    if s.size and np.all(s == s[0]):
        raise ThresholdError("all scores identical; threshold is degenerate")
    grid = DEFAULT_THRESHOLD_GRID if grid is None else tuple(grid)
    if objective == "f1":
        value = lambda t: thresholded_metrics(s, y, t).f1
    elif objective == "mcc":
        value = lambda t: thresholded_metrics(s, y, t).mcc
    else:
        raise ThresholdError(f"unknown threshold objective {objective!r}")
    scored = [(value(t), t) for t in grid]
    best = max(v for v, _ in scored)
    ties = [t for v, t in scored if v == best]
    return min(ties, key=lambda t: (abs(t - 0.5), t))
