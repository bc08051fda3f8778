"""Attributed homogeneous graphs built from raw UE and cell tables.

UEs and cells from separate tables are merged into one node namespace: UEs
take indices [0, n_ue), cells [n_ue, n_ue + n_cell). Node features are
zero-padded to a common width, duplicate user-cell edges are collapsed to
the record with the lowest edge id, and the adjacency is stored undirected.
A built graph is immutable and safe for concurrent reads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .errors import DensityError, GraphConstructionError


class NodeKind(Enum):
    UE = "ue"
    CELL = "cell"


@dataclass
class NodeRecord:
    node_id: int
    kind: NodeKind
    features: np.ndarray


@dataclass
class EdgeRecord:
    edge_id: int
    src: int  # UE node index
    dst: int  # cell node index
    features: np.ndarray
    timestamp: float | None = None


class AttributedGraph:
    """Homogenized node/edge tables plus a symmetric 0/1 adjacency."""

    def __init__(self, nodes, edges, n_ue, ue_raw_ids, cell_raw_ids):
        self.nodes = nodes
        self.edges = edges
        self.n_ue = n_ue
        self.ue_raw_ids = list(ue_raw_ids)
        self.cell_raw_ids = list(cell_raw_ids)
        self.ue_node = {raw: i for i, raw in enumerate(self.ue_raw_ids)}
        self.cell_node = {raw: n_ue + j for j, raw in enumerate(self.cell_raw_ids)}
        self.adjacency = _build_adjacency(len(nodes), edges)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_cells(self):
        return len(self.nodes) - self.n_ue

    @property
    def n_edges(self):
        return len(self.edges)

    def node_kind(self, node_id):
        return NodeKind.UE if node_id < self.n_ue else NodeKind.CELL

    def feature_matrix(self):
        if not self.nodes:
            return np.zeros((0, 0))
        return np.vstack([n.features for n in self.nodes])

    def edge_pairs(self):
        if not self.edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array([(e.src, e.dst) for e in self.edges], dtype=np.int64)

    def edge_feature_matrix(self):
        if not self.edges:
            return np.zeros((0, 0))
        return np.vstack([e.features for e in self.edges])

    def edge_feature_map(self):
        return {(e.src, e.dst): e.features for e in self.edges}

    def degrees(self):
        deg = np.zeros(self.n_nodes, dtype=np.int64)
        for e in self.edges:
            deg[e.src] += 1
            deg[e.dst] += 1
        return deg


def _build_adjacency(n, edges):
    if not edges:
        return sp.csr_matrix((n, n))
    rows = np.fromiter((e.src for e in edges), dtype=np.int64, count=len(edges))
    cols = np.fromiter((e.dst for e in edges), dtype=np.int64, count=len(edges))
    data = np.ones(len(edges))
    a = sp.coo_matrix((np.concatenate([data, data]),
                       (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
                      shape=(n, n)).tocsr()
    a.sum_duplicates()
    a.data[:] = 1.0
    return a


def _pad(vec, width):
    out = np.zeros(width)
    out[:len(vec)] = vec
    return out


def homogenize(ue_table, cell_table, edge_table):
    """Merge raw UE/cell/edge tables into a single-node-type graph.

    `ue_table` and `cell_table` are sequences of (raw_id, feature_vector);
    `edge_table` rows are (edge_id, ue_raw_id, cell_raw_id, features) with
    an optional trailing timestamp. Node features are zero-padded to the
    wider of the two kinds; duplicate (ue, cell) pairs are collapsed to the
    lowest edge id. Edges referencing unknown raw ids raise
    GraphConstructionError naming the id.
    """
    ue_ids = [raw for raw, _ in ue_table]
    cell_ids = [raw for raw, _ in cell_table]
    if len(set(ue_ids)) != len(ue_ids):
        raise GraphConstructionError("duplicate raw UE ids")
    if len(set(cell_ids)) != len(cell_ids):
        raise GraphConstructionError("duplicate raw cell ids")

    width = 0
    for _, feats in list(ue_table) + list(cell_table):
        width = max(width, len(np.atleast_1d(np.asarray(feats, dtype=np.float64))))

    nodes = []
    for raw, feats in ue_table:
        f = _pad(np.atleast_1d(np.asarray(feats, dtype=np.float64)), width)
        if not np.all(np.isfinite(f)):
            raise GraphConstructionError(f"non-finite features on UE {raw!r}")
        nodes.append(NodeRecord(len(nodes), NodeKind.UE, f))
    n_ue = len(nodes)
    for raw, feats in cell_table:
        f = _pad(np.atleast_1d(np.asarray(feats, dtype=np.float64)), width)
        if not np.all(np.isfinite(f)):
            raise GraphConstructionError(f"non-finite features on cell {raw!r}")
        nodes.append(NodeRecord(len(nodes), NodeKind.CELL, f))

    ue_index = {raw: i for i, raw in enumerate(ue_ids)}
    cell_index = {raw: n_ue + j for j, raw in enumerate(cell_ids)}

    edges = []
    for row in edge_table:
        edge_id, ue_raw, cell_raw, feats = row[0], row[1], row[2], row[3]
        ts = row[4] if len(row) > 4 else None
        if ue_raw not in ue_index:
            raise GraphConstructionError(f"edge {edge_id} references unknown UE id {ue_raw!r}")
        if cell_raw not in cell_index:
            raise GraphConstructionError(f"edge {edge_id} references unknown cell id {cell_raw!r}")
        f = np.atleast_1d(np.asarray(feats, dtype=np.float64))
        if not np.all(np.isfinite(f)):
            raise GraphConstructionError(f"non-finite features on edge {edge_id}")
        edges.append(EdgeRecord(int(edge_id), ue_index[ue_raw], cell_index[cell_raw], f, ts))

    return AttributedGraph(nodes, dedup_edges(edges), n_ue, ue_ids, cell_ids)


def dedup_edges(edges):
    """Keep one edge per (src, dst): the one with the lowest edge id.

    Survivors preserve their relative input order; the op is idempotent.
    """
    best = {}
    for e in edges:
        key = (e.src, e.dst)
        kept = best.get(key)
        if kept is None or e.edge_id < kept.edge_id:
            best[key] = e
    return [e for e in edges if best[(e.src, e.dst)] is e]


def density_from_counts(n_nodes, n_edges):
    """Undirected simple-graph density: edges over n*(n-1)/2 pairs."""
    if n_nodes < 2:
        raise DensityError(f"density undefined for {n_nodes} node(s)")
    return n_edges / (n_nodes * (n_nodes - 1) / 2.0)


def density(g):
    return density_from_counts(g.n_nodes, g.n_edges)


def normalize_csr(a):
    """Symmetric normalization D^-1/2 (A + I) D^-1/2 of a 0/1 CSR matrix.

    Self-loops keep isolated nodes from producing zero rows.
    """
    a_tilde = a + sp.identity(a.shape[0], format="csr")
    deg = np.asarray(a_tilde.sum(axis=1)).ravel()
    d_inv_sqrt = sp.diags(1.0 / np.sqrt(deg))
    return (d_inv_sqrt @ a_tilde @ d_inv_sqrt).tocsr()


def normalized_adjacency(g):
    return normalize_csr(g.adjacency)


def undirected_csr(n, pairs):
    """0/1 CSR adjacency over `n` nodes for the given undirected pairs."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.size == 0:
        return sp.csr_matrix((n, n))
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    a = sp.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n)).tocsr()
    a.sum_duplicates()
    a.data[:] = 1.0
    return a
