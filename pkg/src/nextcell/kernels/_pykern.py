"""Pure numpy/deque fallbacks for the compiled kernels.

Semantics (including float accumulation order) match the Cython versions:
`np.add.at` and `np.maximum.at` apply updates sequentially in index order.
"""

from collections import deque

import numpy as np


def segment_sum_1d(values, seg, n):
    out = np.zeros(n, dtype=np.float64)
    np.add.at(out, seg, values)
    return out


def segment_sum_2d(values, seg, n):
    out = np.zeros((n, values.shape[1]), dtype=np.float64)
    np.add.at(out, seg, values)
    return out


def segment_max_1d(values, seg, n, fill):
    out = np.full(n, fill, dtype=np.float64)
    np.maximum.at(out, seg, values)
    return out


def bfs_distances(indptr, indices, start, max_depth, blocked, skip_a, skip_b):
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    if start == blocked or start < 0 or start >= n:
        return dist
    dist[start] = 0
    queue = deque([start])
    while queue:
        i = queue.popleft()
        d = dist[i]
        if 0 <= max_depth <= d:
            continue
        for j in indices[indptr[i]:indptr[i + 1]]:
            if j == blocked or dist[j] >= 0:
                continue
            if (i == skip_a and j == skip_b) or (i == skip_b and j == skip_a):
                continue
            dist[j] = d + 1
            queue.append(j)
    return dist
