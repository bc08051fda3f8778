"""Shared builders for small deterministic test graphs and traces."""

import numpy as np

from nextcell.graph import homogenize
from nextcell.synth import MobilitySample, MobilityTrace, ScenarioConfig


def em_scenario(seed=1, **overrides):
    return ScenarioConfig(rng_seed=seed, **overrides)


def replay_scenario(seed=1):
    return ScenarioConfig(rng_seed=seed, duration_s=900.0, roam_radius_m=100.0,
                          speed_mps=(2.0, 6.0), max_neighbors=3)


def tiny_graph(n_ue=3, n_cell=2, edges=((0, 0), (1, 0), (1, 1), (2, 1))):
    """Small bipartite graph with simple deterministic features."""
    ue_table = [(u, [float(u + 1), 0.5]) for u in range(n_ue)]
    cell_table = [(c, [0.25, float(c + 1)]) for c in range(n_cell)]
    edge_table = [(i, u, c, [float(i + 1), 1.0, 0.0]) for i, (u, c) in enumerate(edges)]
    return homogenize(ue_table, cell_table, edge_table)


def grid_graph(n_ue, n_cell, degree, seed=0, feat_width=4, edge_width=3):
    """Random bipartite graph where each UE links to `degree` cells."""
    rng = np.random.default_rng(seed)
    ue_table = [(u, rng.normal(size=feat_width)) for u in range(n_ue)]
    cell_table = [(c, rng.normal(size=feat_width)) for c in range(n_cell)]
    edge_table = []
    for u in range(n_ue):
        for c in rng.choice(n_cell, size=min(degree, n_cell), replace=False):
            edge_table.append((len(edge_table), u, int(c), rng.normal(size=edge_width)))
    return homogenize(ue_table, cell_table, edge_table)


def rw_shaped_graph(n_groups=8, cells_per_group=4, ues_per_group=30,
                    ue_width=12, cell_width=6, edge_width=10, seed=7):
    """Anonymized-style graph: [0,1] features, isolated cell-group networks."""
    rng = np.random.default_rng(seed)
    ue_table, cell_table, edges = [], [], []
    for c in range(n_groups * cells_per_group):
        cell_table.append((c, rng.uniform(0, 1, cell_width)))
    ue_id = 0
    for grp in range(n_groups):
        group_cells = [grp * cells_per_group + k for k in range(cells_per_group)]
        for _ in range(ues_per_group):
            ue_table.append((ue_id, rng.uniform(0, 1, ue_width)))
            deg = int(rng.integers(2, 4))
            for c in rng.choice(group_cells, size=deg, replace=False):
                edges.append((len(edges), ue_id, int(c), rng.uniform(0, 1, edge_width)))
            ue_id += 1
    return homogenize(ue_table, cell_table, edges)


def write_rw_files(tmpdir, g, node_name="nodes.csv", edge_name="edges.csv"):
    from nextcell.ingest import write_graph
    node_file = tmpdir / node_name
    edge_file = tmpdir / edge_name
    write_graph(g, node_file, edge_file)
    return node_file, edge_file


def hand_trace(rows):
    """Trace from (t, ue, serving, [(cell, rsrp), ...]) tuples; the other
    seven radio features are filled deterministically from the rsrp."""
    samples = []
    for t, ue, serving, cands in rows:
        cand_feats = []
        for cell, rsrp in cands:
            feats = np.array([rsrp, -10.0, 3.0, 20.0, 500.0, 10.0,
                              rsrp - 18.0, rsrp - 3.0])
            cand_feats.append((cell, feats))
        samples.append(MobilitySample(float(t), ue, serving, cand_feats))
    return MobilityTrace(samples)


def em_edge_table_489(n_ue=70, n_cell=31, n_edges=489, seed=3):
    """Deterministic raw tables with exactly the published edge count.

    Every UE keeps degree >= 2; remaining pairs are drawn without
    replacement from the leftover UE-cell combinations.
    """
    rng = np.random.default_rng(seed)
    chosen = set()
    for u in range(n_ue):
        for c in rng.choice(n_cell, size=2, replace=False):
            chosen.add((u, int(c)))
    remaining = [(u, c) for u in range(n_ue) for c in range(n_cell)
                 if (u, c) not in chosen]
    extra = rng.choice(len(remaining), size=n_edges - len(chosen), replace=False)
    chosen.update(remaining[int(i)] for i in extra)
    pairs = sorted(chosen)
    ue_table = [(u, rng.uniform(0, 1, 4)) for u in range(n_ue)]
    cell_table = [(c, rng.uniform(0, 1, 4)) for c in range(n_cell)]
    edge_table = [(i, u, c, rng.uniform(0, 1, 4)) for i, (u, c) in enumerate(pairs)]
    return ue_table, cell_table, edge_table
