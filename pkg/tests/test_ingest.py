"""Edge-list file loading and subset extraction."""

import numpy as np
import pytest

from helpers import rw_shaped_graph, write_rw_files

from nextcell.errors import DataFormatError, SubsetError
from nextcell.graph import density
from nextcell.ingest import SubsetSpec, extract_subset, load_edge_list, write_graph


def _write(path, text):
    path.write_text(text)
    return path


def test_toy_file_roundtrip(tmp_path):
    nodes = _write(tmp_path / "n.csv",
                   "node_id,kind,f1,f2\n0,ue,0.1,0.2\n1,cell,0.3,0.4\n")
    edges = _write(tmp_path / "e.csv", "edge_id,src,dst,f1\n0,0,1,0.5\n")
    g = load_edge_list(nodes, edges)
    assert g.n_nodes == 2 and g.n_edges == 1
    assert g.n_ue == 1 and g.n_cells == 1
    np.testing.assert_allclose(g.edges[0].features, [0.5])


def test_duplicate_pairs_keep_lowest_edge_id(tmp_path):
    nodes = _write(tmp_path / "n.csv", "node_id,kind,f1\n0,ue,0.1\n1,cell,0.2\n")
    edges = _write(tmp_path / "e.csv",
                   "edge_id,src,dst,f1\n7,0,1,0.7\n3,0,1,0.3\n9,0,1,0.9\n")
    g = load_edge_list(nodes, edges)
    assert g.n_edges == 1
    assert g.edges[0].edge_id == 3
    np.testing.assert_allclose(g.edges[0].features, [0.3])


def test_malformed_line_reports_lineno(tmp_path):
    nodes = _write(tmp_path / "n.csv", "node_id,kind,f1\n0,ue,0.1\n1,cell,abc\n")
    edges = _write(tmp_path / "e.csv", "edge_id,src,dst,f1\n")
    with pytest.raises(DataFormatError, match="n.csv:3"):
        load_edge_list(nodes, edges)


def test_bad_headers_and_kinds(tmp_path):
    edges_ok = _write(tmp_path / "e.csv", "edge_id,src,dst,f1\n")
    with pytest.raises(DataFormatError, match=":1"):
        load_edge_list(_write(tmp_path / "n1.csv", "id,kind,f1\n"), edges_ok)
    with pytest.raises(DataFormatError, match="gnb"):
        load_edge_list(_write(tmp_path / "n2.csv", "node_id,kind,f1\n0,gnb,0.2\n"),
                       edges_ok)
    nodes_ok = _write(tmp_path / "n3.csv", "node_id,kind,f1\n0,ue,0.1\n1,cell,0.2\n")
    with pytest.raises(DataFormatError, match="not a UE"):
        load_edge_list(nodes_ok,
                       _write(tmp_path / "e2.csv", "edge_id,src,dst,f1\n0,1,1,0.5\n"))


def test_out_of_range_feature_clamped_with_warning(tmp_path):
    nodes = _write(tmp_path / "n.csv", "node_id,kind,f1\n0,ue,1.7\n1,cell,0.2\n")
    edges = _write(tmp_path / "e.csv", "edge_id,src,dst,f1\n0,0,1,-0.4\n")
    with pytest.warns(UserWarning, match="clamped"):
        g = load_edge_list(nodes, edges)
    assert g.nodes[0].features[0] == 1.0
    assert g.edges[0].features[0] == 0.0


def test_per_kind_widths_from_rows(tmp_path):
    # UEs carry 3 features, cells 1; header fixes the maximum
    nodes = _write(tmp_path / "n.csv",
                   "node_id,kind,f1,f2,f3\n0,ue,0.1,0.2,0.3\n1,cell,0.9\n")
    edges = _write(tmp_path / "e.csv", "edge_id,src,dst,f1,f2\n0,0,1,0.5,0.6\n")
    g = load_edge_list(nodes, edges)
    assert g.feature_matrix().shape == (2, 3)
    np.testing.assert_allclose(g.nodes[1].features, [0.9, 0.0, 0.0])


def test_inconsistent_width_within_kind_rejected(tmp_path):
    nodes = _write(tmp_path / "n.csv",
                   "node_id,kind,f1,f2\n0,ue,0.1,0.2\n1,ue,0.3\n2,cell,0.4\n")
    edges = _write(tmp_path / "e.csv", "edge_id,src,dst,f1\n")
    with pytest.raises(DataFormatError, match="widths"):
        load_edge_list(nodes, edges)


def test_rw_shaped_roundtrip(tmp_path):
    g = rw_shaped_graph()
    node_file, edge_file = write_rw_files(tmp_path, g)
    g2 = load_edge_list(node_file, edge_file)
    assert g2.n_nodes == g.n_nodes and g2.n_edges == g.n_edges
    np.testing.assert_allclose(g2.feature_matrix(), g.feature_matrix(), atol=1e-9)
    assert [(e.src, e.dst) for e in g2.edges] == [(e.src, e.dst) for e in g.edges]


def test_subset_deterministic_and_clean(tmp_path):
    g = rw_shaped_graph()
    spec = SubsetSpec(n_cells=10, n_ues=60, selection_seed=3)
    s1 = extract_subset(g, spec)
    s2 = extract_subset(g, spec)
    assert s1.n_cells == 10 and s1.n_ue == 60
    assert [(e.src, e.dst) for e in s1.edges] == [(e.src, e.dst) for e in s2.edges]
    # no dangling edges, indices recompacted
    for e in s1.edges:
        assert 0 <= e.src < s1.n_ue
        assert s1.n_ue <= e.dst < s1.n_nodes


def test_subset_full_size_is_identity_up_to_reindexing(tmp_path):
    g = rw_shaped_graph()
    s = extract_subset(g, SubsetSpec(n_cells=g.n_cells, n_ues=g.n_ue,
                                     selection_seed=0))
    assert s.n_nodes == g.n_nodes
    assert s.n_edges == g.n_edges
    raw_pairs = lambda gr: {(gr.ue_raw_ids[e.src], gr.cell_raw_ids[e.dst - gr.n_ue])
                            for e in gr.edges}
    assert raw_pairs(s) == raw_pairs(g)


def test_subset_star_density_closed_form():
    from nextcell.graph import homogenize
    k = 6
    ue_table = [(u, [0.1]) for u in range(k)]
    cell_table = [(0, [0.2]), (1, [0.3])]
    edge_table = [(u, u, 0, [0.5]) for u in range(k)]
    edge_table.append((k, 0, 1, [0.5]))
    g = homogenize(ue_table, cell_table, edge_table)
    star = extract_subset(g, SubsetSpec(n_cells=1, n_ues=k, selection_seed=1))
    if star.n_edges == k:  # chosen cell was the hub
        assert abs(density(star) - k / ((k + 1) * k / 2.0)) < 1e-12


def test_subset_bounds_error():
    g = rw_shaped_graph()
    with pytest.raises(SubsetError):
        extract_subset(g, SubsetSpec(n_cells=g.n_cells + 1, n_ues=5))
    with pytest.raises(SubsetError):
        extract_subset(g, SubsetSpec(n_cells=1, n_ues=g.n_ue + 1))


def test_load_extract_deterministic_end_to_end(tmp_path):
    g = rw_shaped_graph()
    node_file, edge_file = write_rw_files(tmp_path, g)

    def run():
        loaded = load_edge_list(node_file, edge_file)
        sub = extract_subset(loaded, SubsetSpec(8, 50, selection_seed=5))
        return [(e.edge_id, e.src, e.dst) for e in sub.edges]

    assert run() == run()


def test_write_graph_then_subset_star_hub():
    # deterministic star check without relying on which cell the rng picks
    from nextcell.graph import homogenize
    k = 5
    g = homogenize([(u, [0.1]) for u in range(k)], [(0, [0.2])],
                   [(u, u, 0, [0.5]) for u in range(k)])
    star = extract_subset(g, SubsetSpec(n_cells=1, n_ues=k, selection_seed=0))
    assert star.n_edges == k
    assert abs(density(star) - k / ((k + 1) * k / 2.0)) < 1e-12
    assert abs(density(star) - 2.0 / (k + 1)) < 1e-12
