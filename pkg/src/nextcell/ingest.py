"""Load anonymized edge-list datasets and extract scale-controlled subsets.

File formats (comma-separated, one header row):
  node file: node_id,kind,f1..fk   with kind in {ue, cell}
  edge file: edge_id,src,dst,f1..fm

Feature widths come from the headers, never from hard-coded dataset
dimensions. Rows may omit trailing feature columns, but widths must be
consistent within each node kind; values outside [0, 1] are clamped with a
warning, since these datasets declare normalized features. Node ids are
unique within their kind; numeric ids are parsed as integers so graphs
written by the generator round-trip exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, SubsetError
from .graph import homogenize


@dataclass
class SubsetSpec:
    n_cells: int
    n_ues: int
    selection_seed: int = 0


def _parse_id(s):
    try:
        return int(s)
    except ValueError:
        return s


def _parse_features(parts, path, lineno, clamp):
    try:
        feats = np.array([float(v) for v in parts], dtype=np.float64)
    except ValueError as exc:
        raise DataFormatError(f"{path}:{lineno}: {exc}") from None
    if not np.all(np.isfinite(feats)):
        raise DataFormatError(f"{path}:{lineno}: non-finite feature value")
    if clamp and feats.size and (feats.min() < 0.0 or feats.max() > 1.0):
        warnings.warn(f"{path}:{lineno}: feature outside [0, 1] clamped", stacklevel=2)
        feats = np.clip(feats, 0.0, 1.0)
    return feats


def load_edge_list(node_file, edge_file, clamp_unit_range=True):
    """Build a graph from node/edge CSV files via homogenize + dedup."""
    ue_table = []
    cell_table = []
    kind_of = {}
    with open(node_file) as fh:
        header = fh.readline().strip().split(",")
        if len(header) < 2 or header[0] != "node_id" or header[1] != "kind":
            raise DataFormatError(f"{node_file}:1: header must start with node_id,kind")
        max_width = len(header) - 2
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) < 2 or len(parts) - 2 > max_width:
                raise DataFormatError(f"{node_file}:{lineno}: expected at most "
                                      f"{max_width + 2} fields, got {len(parts)}")
            raw_id = _parse_id(parts[0])
            kind = parts[1].strip().lower()
            if kind not in ("ue", "cell"):
                raise DataFormatError(f"{node_file}:{lineno}: unknown kind {parts[1]!r}")
            if (kind, raw_id) in kind_of:
                raise DataFormatError(f"{node_file}:{lineno}: duplicate {kind} id {parts[0]!r}")
            kind_of[(kind, raw_id)] = True
            feats = _parse_features(parts[2:], node_file, lineno, clamp_unit_range)
            (ue_table if kind == "ue" else cell_table).append((raw_id, feats))

    for name, table in (("ue", ue_table), ("cell", cell_table)):
        widths = {len(f) for _, f in table}
        if len(widths) > 1:
            raise DataFormatError(f"{node_file}: inconsistent {name} feature "
                                  f"widths {sorted(widths)}")

    edge_table = []
    with open(edge_file) as fh:
        header = fh.readline().strip().split(",")
        if len(header) < 3 or header[:3] != ["edge_id", "src", "dst"]:
            raise DataFormatError(f"{edge_file}:1: header must start with edge_id,src,dst")
        max_width = len(header) - 3
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) < 3 or len(parts) - 3 > max_width:
                raise DataFormatError(f"{edge_file}:{lineno}: expected at most "
                                      f"{max_width + 3} fields, got {len(parts)}")
            try:
                edge_id = int(parts[0])
            except ValueError:
                raise DataFormatError(f"{edge_file}:{lineno}: bad edge id {parts[0]!r}") from None
            src = _parse_id(parts[1])
            dst = _parse_id(parts[2])
            if ("ue", src) not in kind_of:
                raise DataFormatError(f"{edge_file}:{lineno}: src {parts[1]!r} is not a UE node")
            if ("cell", dst) not in kind_of:
                raise DataFormatError(f"{edge_file}:{lineno}: dst {parts[2]!r} is not a cell node")
            feats = _parse_features(parts[3:], edge_file, lineno, clamp_unit_range)
            edge_table.append((edge_id, src, dst, feats))

    return homogenize(ue_table, cell_table, edge_table)


def write_graph(g, node_file, edge_file):
    """Write a graph back out in the edge-list file format."""
    feats = g.feature_matrix()
    width = feats.shape[1] if feats.size else 0
    with open(node_file, "w") as fh:
        fh.write("node_id,kind," + ",".join(f"f{i + 1}" for i in range(width)) + "\n")
        for node in g.nodes:
            raw = (g.ue_raw_ids[node.node_id] if node.node_id < g.n_ue
                   else g.cell_raw_ids[node.node_id - g.n_ue])
            row = [str(raw), node.kind.value]
            row.extend(format(v, ".10g") for v in node.features)
            fh.write(",".join(row) + "\n")
    ewidth = g.edge_feature_matrix().shape[1] if g.edges else 0
    with open(edge_file, "w") as fh:
        fh.write("edge_id,src,dst," + ",".join(f"f{i + 1}" for i in range(ewidth)) + "\n")
        for e in g.edges:
            row = [str(e.edge_id), str(g.ue_raw_ids[e.src]),
                   str(g.cell_raw_ids[e.dst - g.n_ue])]
            row.extend(format(v, ".10g") for v in e.features)
            fh.write(",".join(row) + "\n")


def extract_subset(g, spec):
    """Seeded subset keeping whole sub-networks: chosen cells plus UEs
    attached to them, with node indices recompacted.

    If fewer UEs touch the chosen cells than requested, the remainder is
    drawn from the untouched UEs so a full-size spec reproduces the input
    graph up to reindexing.
    """
    if spec.n_cells < 1 or spec.n_cells > g.n_cells:
        raise SubsetError(f"requested {spec.n_cells} cells, graph has {g.n_cells}")
    if spec.n_ues < 1 or spec.n_ues > g.n_ue:
        raise SubsetError(f"requested {spec.n_ues} UEs, graph has {g.n_ue}")

    rng = np.random.default_rng(spec.selection_seed)
    cell_nodes = g.n_ue + rng.choice(g.n_cells, size=spec.n_cells, replace=False)
    cell_set = set(int(c) for c in cell_nodes)

    attached = sorted({e.src for e in g.edges if e.dst in cell_set})
    if len(attached) >= spec.n_ues:
        picked = rng.choice(len(attached), size=spec.n_ues, replace=False)
        ue_set = {attached[int(i)] for i in picked}
    else:
        ue_set = set(attached)
        rest = [u for u in range(g.n_ue) if u not in ue_set]
        extra = rng.choice(len(rest), size=spec.n_ues - len(ue_set), replace=False)
        ue_set.update(rest[int(i)] for i in extra)

    ue_table = [(g.ue_raw_ids[u], g.nodes[u].features) for u in sorted(ue_set)]
    cell_table = [(g.cell_raw_ids[c - g.n_ue], g.nodes[c].features)
                  for c in sorted(cell_set)]
    edge_table = [(e.edge_id, g.ue_raw_ids[e.src], g.cell_raw_ids[e.dst - g.n_ue],
                   e.features, e.timestamp)
                  for e in g.edges if e.src in ue_set and e.dst in cell_set]
    return homogenize(ue_table, cell_table, edge_table)
