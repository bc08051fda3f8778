"""Subgraph-based link prediction: enclosing subgraphs around candidate
pairs, positional node labels, a stacked sum-aggregation encoder, and a
binary classifier.

The target edge is removed before extraction so the classifier never sees
the link it is asked to predict. Aggregation uses raw neighbor sums (no
degree normalization, no self term); a config flag switches to the
normalized variant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import NonFiniteError, TrainingError
from .graph import normalize_csr, undirected_csr
from .metrics import auc, average_precision
from .nn.losses import cross_entropy
from .nn.optim import ModelState, adam_step
from .nn.tensor import Tape, Tensor, add, matmul, mul, relu, segment_sum, spmm
from .vgae import standardize


@dataclass
class EnclosingSubgraph:
    pair: tuple  # global (u, v)
    nodes: np.ndarray  # global node ids, local index = position
    u_local: int
    v_local: int
    indptr: np.ndarray  # local undirected adjacency, target edge removed
    indices: np.ndarray
    labels: np.ndarray | None = None
    features: np.ndarray | None = None

    @property
    def n_nodes(self):
        return len(self.nodes)

    def local_pairs(self):
        """Local undirected edges, each once with a < b."""
        out = []
        for a in range(self.n_nodes):
            for b in self.indices[self.indptr[a]:self.indptr[a + 1]]:
                if a < b:
                    out.append((a, int(b)))
        return out


def extract_subgraph(message_csr, pair, hops=1):
    """Nodes within `hops` of either endpoint after removing the target edge.

    `message_csr` is the undirected training adjacency. Isolated endpoints
    still yield the two-node subgraph.
    """
    u, v = int(pair[0]), int(pair[1])
    indptr = message_csr.indptr
    indices = message_csr.indices
    du = kernels.bfs_distances(indptr, indices, u, max_depth=hops, skip_edge=(u, v))
    dv = kernels.bfs_distances(indptr, indices, v, max_depth=hops, skip_edge=(u, v))
    keep = (du >= 0) | (dv >= 0)
    keep[u] = True
    keep[v] = True
    nodes = np.where(keep)[0].astype(np.int64)
    local = {int(g): i for i, g in enumerate(nodes)}

    rows = []
    cols = []
    for a_local, a_global in enumerate(nodes):
        for b_global in indices[indptr[a_global]:indptr[a_global + 1]]:
            b_local = local.get(int(b_global))
            if b_local is None:
                continue
            if {int(a_global), int(b_global)} == {u, v}:
                continue
            rows.append(a_local)
            cols.append(b_local)
    m = len(nodes)
    a_local_csr = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m)).tocsr()
    return EnclosingSubgraph(pair=(u, v), nodes=nodes,
                             u_local=local[u], v_local=local[v],
                             indptr=a_local_csr.indptr.astype(np.int64),
                             indices=a_local_csr.indices.astype(np.int64))


def label_nodes(sg):
    """Double-radius positional labels on the extracted subgraph.

    Distances to each endpoint are measured with the other endpoint
    removed. Both endpoints get label 1; nodes unreachable from either get
    0; otherwise 1 + min(du, dv) + (d//2) * ((d//2) + d%2 - 1) with
    d = du + dv. The result is stored on the subgraph and returned.
    """
    du = kernels.bfs_distances(sg.indptr, sg.indices, sg.u_local, blocked=sg.v_local)
    dv = kernels.bfs_distances(sg.indptr, sg.indices, sg.v_local, blocked=sg.u_local)
    labels = np.zeros(sg.n_nodes, dtype=np.int64)
    reachable = (du >= 0) & (dv >= 0)
    d = du + dv
    half = d // 2
    vals = 1 + np.minimum(du, dv) + half * (half + d % 2 - 1)
    labels[reachable] = vals[reachable]
    labels[sg.u_local] = 1
    labels[sg.v_local] = 1
    sg.labels = labels
    return labels


def attach_features(sg, node_x, edge_lookup, edge_dim, label_cap):
    """Node inputs: original features | one-hot label | incident edge means.

    `node_x` is the (standardized) global node feature matrix;
    `edge_lookup` maps global (ue, cell) pairs to standardized edge
    features. Labels above `label_cap` share the top one-hot bucket.
    """
    if sg.labels is None:
        label_nodes(sg)
    m = sg.n_nodes
    onehot = np.zeros((m, label_cap + 1))
    onehot[np.arange(m), np.minimum(sg.labels, label_cap)] = 1.0

    esum = np.zeros((m, edge_dim))
    ecount = np.zeros(m)
    for a, b in sg.local_pairs():
        ga, gb = int(sg.nodes[a]), int(sg.nodes[b])
        feats = edge_lookup.get((ga, gb)) if (ga, gb) in edge_lookup else edge_lookup.get((gb, ga))
        if feats is None:
            feats = np.zeros(edge_dim)
        esum[a] += feats
        esum[b] += feats
        ecount[a] += 1
        ecount[b] += 1
    emean = esum / np.maximum(ecount, 1.0)[:, None]

    sg.features = np.hstack([node_x[sg.nodes], onehot, emean])
    return sg.features


class SubgraphBatch:
    """Disjoint union of prepared subgraphs for one aggregated forward pass."""

    def __init__(self, subgraphs, normalized=False):
        xs = []
        rows = []
        cols = []
        gid = []
        offset = 0
        for i, sg in enumerate(subgraphs):
            xs.append(sg.features)
            for a in range(sg.n_nodes):
                for b in sg.indices[sg.indptr[a]:sg.indptr[a + 1]]:
                    rows.append(offset + a)
                    cols.append(offset + int(b))
            gid.extend([i] * sg.n_nodes)
            offset += sg.n_nodes
        self.x = np.vstack(xs) if xs else np.zeros((0, 0))
        self.graph_id = np.asarray(gid, dtype=np.int64)
        self.n_graphs = len(subgraphs)
        self.counts = np.bincount(self.graph_id, minlength=self.n_graphs).astype(np.float64)
        adj = sp.coo_matrix((np.ones(len(rows)), (rows, cols)),
                            shape=(offset, offset)).tocsr()
        self.adj = normalize_csr(adj) if normalized else adj


def batch_logits(state, batch):
    """Link logits for every subgraph in the batch, shape (B, 1)."""
    h = Tensor(batch.x)
    h = relu(matmul(spmm(batch.adj, h), state["gcn1_w"]))
    h = relu(matmul(spmm(batch.adj, h), state["gcn2_w"]))
    pooled = mul(segment_sum(h, batch.graph_id, batch.n_graphs),
                 (1.0 / batch.counts)[:, None])
    r = relu(add(matmul(pooled, state["read_w"]), state["read_b"]))
    return add(matmul(r, state["cls_w"]), state["cls_b"])


def forward_seal(state, sg, normalized=False):
    """Scalar link logit for one prepared subgraph."""
    return batch_logits(state, SubgraphBatch([sg], normalized=normalized))


def init_seal_state(feature_dim, hidden, dense, seed):
    rng = np.random.default_rng([seed, 17])

    def glorot(n_in, n_out):
        limit = np.sqrt(6.0 / (n_in + n_out))
        return rng.uniform(-limit, limit, size=(n_in, n_out))

    return ModelState({
        "gcn1_w": glorot(feature_dim, hidden),
        "gcn2_w": glorot(hidden, hidden),
        "read_w": glorot(hidden, dense),
        "read_b": np.zeros((1, dense)),
        "cls_w": glorot(dense, 1),
        "cls_b": np.zeros((1, 1)),
    })


def prepare_pairs(g, message_pairs, pairs, hops, label_cap):
    """Extract, label, and featurize one subgraph per candidate pair."""
    msg_csr = undirected_csr(g.n_nodes, message_pairs)
    node_x, _, _ = standardize(g.feature_matrix())
    raw_lookup = g.edge_feature_map()
    if raw_lookup:
        keys = list(raw_lookup)
        stacked, _, _ = standardize(np.vstack([raw_lookup[k] for k in keys]))
        edge_lookup = {k: stacked[i] for i, k in enumerate(keys)}
        edge_dim = stacked.shape[1]
    else:
        edge_lookup = {}
        edge_dim = 1
    subgraphs = []
    for pair in np.asarray(pairs, dtype=np.int64).reshape(-1, 2):
        sg = extract_subgraph(msg_csr, pair, hops=hops)
        label_nodes(sg)
        attach_features(sg, node_x, edge_lookup, edge_dim, label_cap)
        subgraphs.append(sg)
    return subgraphs


def estimate_cost(g, message_pairs, n_pairs, hops=1, sample=50, seed=0):
    """Pair count times mean sampled subgraph size; grows with the pair
    count rather than the graph, which is exactly why it gets expensive."""
    msg_csr = undirected_csr(g.n_nodes, message_pairs)
    rng = np.random.default_rng(seed)
    ue = rng.integers(0, g.n_ue, size=min(sample, max(n_pairs, 1)))
    cell = rng.integers(g.n_ue, g.n_nodes, size=ue.size)
    sizes = [extract_subgraph(msg_csr, (int(u), int(c)), hops=hops).n_nodes
             for u, c in zip(ue, cell)]
    return float(n_pairs) * float(np.mean(sizes) if sizes else 2.0)


def train_seal(g, bundle, cfg):
    """Train the subgraph classifier; returns (state, curve).

    Subgraphs are extracted once from the message edges, labels 1 for train
    positives and 0 for train negatives. Cross-entropy plus L2 (via the
    optimizer's weight decay) is minimized with Adam; early stopping
    watches validation AUC.
    """
    cfg.validate()
    train_pairs = np.vstack([bundle.train_pos, bundle.train_neg])
    train_labels = np.concatenate([np.ones(len(bundle.train_pos)),
                                   np.zeros(len(bundle.train_neg))])
    val_pairs = np.vstack([bundle.val_pos, bundle.val_neg])
    val_labels = np.concatenate([np.ones(len(bundle.val_pos)),
                                 np.zeros(len(bundle.val_neg))])

    subgraphs = prepare_pairs(g, bundle.message_edges,
                              np.vstack([train_pairs, val_pairs]),
                              cfg.hops, cfg.label_cap)
    n_train = len(train_pairs)
    train_batch = SubgraphBatch(subgraphs[:n_train], normalized=cfg.normalized_agg)
    val_batch = SubgraphBatch(subgraphs[n_train:], normalized=cfg.normalized_agg)

    state = init_seal_state(train_batch.x.shape[1], cfg.seal_hidden,
                            cfg.seal_dense, cfg.seed)
    curve = []
    best_auc = -np.inf
    best_snap = state.snapshot()
    wait = 0
    for epoch in range(cfg.max_epochs):
        try:
            with Tape() as tape:
                logits = batch_logits(state, train_batch)
                loss = cross_entropy(logits, train_labels)
            tape.backward(loss)
        except NonFiniteError as exc:
            raise TrainingError(f"training diverged at epoch {epoch}: {exc}") from exc
        grads = {name: state[name].grad for name in state.names()}
        adam_step(state, grads, cfg.lr, weight_decay=cfg.seal_l2)

        val_scores = _sigmoid(batch_logits(state, val_batch).data.ravel())
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


def predict_pairs(state, g, message_pairs, pairs, cfg):
    """Probabilities for candidate pairs under a trained classifier."""
    subgraphs = prepare_pairs(g, message_pairs, pairs, cfg.hops, cfg.label_cap)
    batch = SubgraphBatch(subgraphs, normalized=cfg.normalized_agg)
    return _sigmoid(batch_logits(state, batch).data.ravel())


def _sigmoid(x):
    return np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                    np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
