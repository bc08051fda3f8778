"""Graph construction rules, dedup, density, and normalization."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import em_edge_table_489, tiny_graph

from nextcell.errors import DensityError, GraphConstructionError
from nextcell.graph import (AttributedGraph, EdgeRecord, NodeKind, dedup_edges,
                            density, density_from_counts, homogenize,
                            normalized_adjacency)


def test_homogenize_published_counts():
    ue_table, cell_table, edge_table = em_edge_table_489()
    g = homogenize(ue_table, cell_table, edge_table)
    assert g.n_nodes == 101
    assert g.n_ue == 70 and g.n_cells == 31
    assert g.n_edges == 489


def test_homogenize_empty_edges():
    g = homogenize([(0, [1.0])], [(0, [2.0])], [])
    assert g.n_nodes == 2 and g.n_edges == 0
    with pytest.raises(DensityError):
        density_from_counts(1, 0)
    assert density(g) == 0.0


def test_homogenize_pads_to_common_width():
    g = homogenize([(0, [1.0, 2.0, 3.0]), (1, [4.0, 5.0, 6.0])],
                   [(9, [1.0, 2.0, 3.0, 4.0, 5.0])],
                   [(0, 0, 9, [0.5])])
    feats = g.feature_matrix()
    assert feats.shape == (3, 5)
    np.testing.assert_array_equal(feats[0], [1.0, 2.0, 3.0, 0.0, 0.0])
    np.testing.assert_array_equal(feats[2], [1.0, 2.0, 3.0, 4.0, 5.0])


def test_homogenize_index_layout():
    g = tiny_graph()
    assert [n.kind for n in g.nodes[:g.n_ue]] == [NodeKind.UE] * g.n_ue
    assert [n.kind for n in g.nodes[g.n_ue:]] == [NodeKind.CELL] * g.n_cells
    assert [n.node_id for n in g.nodes] == list(range(g.n_nodes))


def test_homogenize_dangling_edge_names_offender():
    with pytest.raises(GraphConstructionError, match="77"):
        homogenize([(0, [1.0])], [(1, [1.0])], [(5, 77, 1, [0.0])])
    with pytest.raises(GraphConstructionError, match="99"):
        homogenize([(0, [1.0])], [(1, [1.0])], [(5, 0, 99, [0.0])])


def test_homogenize_rejects_duplicate_raw_ids():
    with pytest.raises(GraphConstructionError):
        homogenize([(0, [1.0]), (0, [2.0])], [(1, [1.0])], [])


def _edge(i, s, d):
    return EdgeRecord(i, s, d, np.zeros(1))


def test_dedup_keeps_lowest_id():
    edges = [_edge(7, 0, 3), _edge(3, 0, 3), _edge(9, 0, 3)]
    kept = dedup_edges(edges)
    assert len(kept) == 1 and kept[0].edge_id == 3


def test_dedup_idempotent_and_order_preserving():
    edges = [_edge(5, 0, 2), _edge(1, 1, 2), _edge(4, 0, 2), _edge(2, 0, 3)]
    once = dedup_edges(edges)
    assert [e.edge_id for e in once] == [1, 4, 2]
    assert dedup_edges(once) == once


def test_dedup_noop_on_unique_pairs():
    edges = [_edge(3, 0, 2), _edge(1, 1, 2), _edge(2, 0, 3)]
    assert dedup_edges(edges) == edges


def test_em_dedup_reduces_to_published_count():
    ue_table, cell_table, edge_table = em_edge_table_489()
    # blow the 489 unique pairs up to the published raw count, then rebuild
    rng = np.random.default_rng(5)
    raw = list(edge_table)
    next_id = len(raw)
    while len(raw) < 449_152:
        take = min(len(edge_table), 449_152 - len(raw))
        for row in edge_table[:take]:
            raw.append((next_id, row[1], row[2], row[3]))
            next_id += 1
    assert len(raw) == 449_152
    g = homogenize(*em_edge_table_489()[:2], raw)
    assert g.n_edges == 489
    assert abs(density(g) - 0.09683) <= 5e-6


def test_density_em_figures():
    assert abs(density_from_counts(101, 489) - 0.09683) <= 5e-6
    assert round(density_from_counts(169_000, 7_000_000), 5) == 0.00049


def test_density_single_pair():
    g = homogenize([(0, [1.0])], [(1, [1.0])], [(0, 0, 1, [1.0])])
    assert density(g) == 1.0


def test_density_invariant_under_reindexing():
    g = tiny_graph()
    # relabel raw ids; layout (and counts) unchanged
    ue_table = [(f"u{u}", g.nodes[u].features) for u in range(g.n_ue)]
    cells = [(f"c{i}", g.nodes[g.n_ue + i].features) for i in range(g.n_cells)]
    perm = list(reversed(range(g.n_edges)))
    edge_table = [(k, f"u{g.edges[i].src}", f"c{g.edges[i].dst - g.n_ue}",
                   g.edges[i].features) for k, i in enumerate(perm)]
    g2 = homogenize(list(reversed(ue_table)), cells, edge_table)
    assert density(g2) == density(g)


def test_adjacency_symmetric_no_self_loops():
    g = tiny_graph()
    a = g.adjacency
    assert (a != a.T).nnz == 0
    assert a.diagonal().sum() == 0
    for e in g.edges:
        assert g.node_kind(e.src) == NodeKind.UE
        assert g.node_kind(e.dst) == NodeKind.CELL


def test_normalized_adjacency_single_node():
    g = homogenize([(0, [1.0])], [], [])
    a_hat = normalized_adjacency(g)
    np.testing.assert_allclose(a_hat.toarray(), [[1.0]])


def test_normalized_adjacency_two_nodes():
    g = homogenize([(0, [1.0])], [(0, [1.0])], [(0, 0, 0, [1.0])])
    np.testing.assert_allclose(normalized_adjacency(g).toarray(),
                               np.full((2, 2), 0.5), atol=1e-15)


def test_normalized_adjacency_path_row_sums_vs_dense_oracle():
    # path graph on 3 nodes: UE0 - cell0 - UE1 (node order: ue0, ue1, cell0)
    g = homogenize([(0, [1.0]), (1, [1.0])], [(0, [1.0])],
                   [(0, 0, 0, [1.0]), (1, 1, 0, [1.0])])
    a_hat = normalized_adjacency(g).toarray()

    a = g.adjacency.toarray() + np.eye(3)
    d_inv_sqrt = np.diag(1.0 / np.sqrt(a.sum(axis=1)))
    oracle = d_inv_sqrt @ a @ d_inv_sqrt
    np.testing.assert_allclose(a_hat, oracle, atol=1e-15)
    # oracle row sums: ends 1/2 + 1/sqrt(6), middle 1/3 + 2/sqrt(6)
    np.testing.assert_allclose(a_hat.sum(axis=1), oracle.sum(axis=1), atol=1e-12)
    np.testing.assert_allclose(a_hat.sum(axis=1), [0.9082483, 0.9082483, 1.1498299],
                               atol=1e-7)


def test_normalized_adjacency_properties(em_graph):
    a_hat = normalized_adjacency(em_graph)
    assert (abs(a_hat - a_hat.T) > 1e-12).nnz == 0
    assert a_hat.data.min() > 0.0 and a_hat.data.max() <= 1.0
    assert np.all(a_hat.diagonal() > 0.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 4), st.integers(0, 50)),
                min_size=1, max_size=60))
def test_dedup_idempotent_property(rows):
    edges = [_edge(eid, s, 10 + d) for s, d, eid in rows]
    once = dedup_edges(edges)
    twice = dedup_edges(once)
    assert once == twice
    pairs = [(e.src, e.dst) for e in once]
    assert len(pairs) == len(set(pairs))
    for e in once:
        group = [x.edge_id for x in edges if (x.src, x.dst) == (e.src, e.dst)]
        assert e.edge_id == min(group)
