"""Structure-preserving edge splits with leakage-free negative sampling.

The failure modes this guards against: positive edges reappearing as
negatives, and the same negative pair landing in two splits. Negatives are
rejected against the full positive set (train + val + test) and against
every other drawn negative, so the six sets are pairwise disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError, SamplingError, SplitError

SPLIT_NAMES = ("train", "val", "test")


@dataclass
class SplitBundle:
    train_pos: np.ndarray
    val_pos: np.ndarray
    test_pos: np.ndarray
    train_neg: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    val_neg: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    test_neg: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))

    @property
    def message_edges(self):
        """Edges used to build the training-time adjacency: train positives."""
        return self.train_pos

    def positives(self):
        return np.vstack([self.train_pos, self.val_pos, self.test_pos])

    def sets(self):
        return {
            ("train", "pos"): self.train_pos, ("val", "pos"): self.val_pos,
            ("test", "pos"): self.test_pos, ("train", "neg"): self.train_neg,
            ("val", "neg"): self.val_neg, ("test", "neg"): self.test_neg,
        }


def _pair_set(arr):
    return {(int(a), int(b)) for a, b in arr}


def largest_remainder_counts(total, ratios):
    """Integer quotas summing to `total`; ties go to the earlier split."""
    exact = [total * r for r in ratios]
    counts = [int(x) for x in exact]
    short = total - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


def split(g, ratios=(0.8, 0.1, 0.1), seed=0):
    """Partition the deduped positive edges into train/val/test.

    A spanning set per connected component is assigned to train first so
    every positive-degree node keeps at least one training edge; the
    remaining edges are shuffled by the seed and fill the quotas.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise SplitError(f"ratios must be three positive values summing to 1, got {ratios}")
    pairs = g.edge_pairs()
    n_edges = pairs.shape[0]
    if n_edges < 10:
        raise SplitError(f"graph has {n_edges} edges; at least 10 are required")

    n_train, n_val, n_test = largest_remainder_counts(n_edges, ratios)

    rng = np.random.default_rng(seed)
    order = rng.permutation(n_edges)

    parent = list(range(g.n_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    spanning = []
    rest = []
    for idx in order:
        a, b = find(int(pairs[idx, 0])), find(int(pairs[idx, 1]))
        if a != b:
            parent[a] = b
            spanning.append(idx)
        else:
            rest.append(idx)

    if len(spanning) > n_train:
        raise SplitError(
            f"cannot keep every node in train: spanning set needs {len(spanning)} "
            f"edges but the train quota is {n_train}")

    train_idx = spanning + rest[:n_train - len(spanning)]
    rest = rest[n_train - len(spanning):]
    val_idx = rest[:n_val]
    test_idx = rest[n_val:n_val + n_test]
    return SplitBundle(train_pos=pairs[np.sort(np.array(train_idx, dtype=np.int64))],
                       val_pos=pairs[np.sort(np.array(val_idx, dtype=np.int64))],
                       test_pos=pairs[np.sort(np.array(test_idx, dtype=np.int64))])


def sample_negatives(g, bundle, seed=0):
    """Fill the bundle with UE-cell negatives, one per positive per split.

    Negatives avoid the full positive edge set and never repeat across
    splits. When the graph is too dense to supply enough distinct pairs, a
    SamplingError reports the shortfall.
    """
    rng = np.random.default_rng(seed)
    needed = [bundle.train_pos.shape[0], bundle.val_pos.shape[0], bundle.test_pos.shape[0]]
    total_needed = sum(needed)
    positives = _pair_set(bundle.positives())
    capacity = g.n_ue * g.n_cells - len(positives)
    if capacity < total_needed:
        raise SamplingError(
            f"need {total_needed} negative pairs but only {capacity} non-edges exist "
            f"(short by {total_needed - capacity})")

    if total_needed > 0.25 * capacity:
        # Too saturated for rejection sampling: enumerate all non-edges.
        all_pairs = [(u, c) for u in range(g.n_ue)
                     for c in range(g.n_ue, g.n_nodes) if (u, c) not in positives]
        chosen = rng.choice(len(all_pairs), size=total_needed, replace=False)
        drawn = [all_pairs[int(i)] for i in chosen]
    else:
        taken = set()
        drawn = []
        while len(drawn) < total_needed:
            u = int(rng.integers(0, g.n_ue))
            c = int(rng.integers(g.n_ue, g.n_nodes))
            if (u, c) in positives or (u, c) in taken:
                continue
            taken.add((u, c))
            drawn.append((u, c))

    drawn = np.array(drawn, dtype=np.int64).reshape(-1, 2)
    train_neg = drawn[:needed[0]]
    val_neg = drawn[needed[0]:needed[0] + needed[1]]
    test_neg = drawn[needed[0] + needed[1]:]
    return SplitBundle(bundle.train_pos, bundle.val_pos, bundle.test_pos,
                       train_neg, val_neg, test_neg)


def make_split(g, ratios=(0.8, 0.1, 0.1), seed=0):
    """split + sample_negatives under one seed."""
    return sample_negatives(g, split(g, ratios, seed), seed)


def save_manifest(bundle, path):
    """Text manifest with one `split,polarity,src,dst` row per pair."""
    with open(path, "w") as fh:
        fh.write("split,polarity,src,dst\n")
        for (name, polarity), pairs in bundle.sets().items():
            for src, dst in pairs:
                fh.write(f"{name},{polarity},{src},{dst}\n")


def load_manifest(path):
    sets = {(name, pol): [] for name in SPLIT_NAMES for pol in ("pos", "neg")}
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "split,polarity,src,dst":
            raise DataFormatError(f"{path}:1: unexpected header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4 or (parts[0], parts[1]) not in sets:
                raise DataFormatError(f"{path}:{lineno}: bad manifest row {line!r}")
            try:
                sets[(parts[0], parts[1])].append((int(parts[2]), int(parts[3])))
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None

    def arr(key):
        rows = sets[key]
        return (np.array(rows, dtype=np.int64) if rows
                else np.zeros((0, 2), dtype=np.int64))

    return SplitBundle(arr(("train", "pos")), arr(("val", "pos")), arr(("test", "pos")),
                       arr(("train", "neg")), arr(("val", "neg")), arr(("test", "neg")))
