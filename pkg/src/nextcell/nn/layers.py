"""Message-passing layers and the edge probability decoder."""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import DimensionError, InputError
from .tensor import (Tensor, add, div, exp, gather_rows, leaky_relu, matmul,
                     mul, relu, segment_sum, sigmoid, slice_rows, spmm, sub,
                     tsum)


def gcn_layer(h, a_hat, w, activation="relu"):
    """Degree-normalized aggregation: act(A_hat @ H @ W).

    `a_hat` is a constant scipy sparse matrix; `activation` is "relu" or
    "linear" (linear is used by distribution heads that must go negative).
    """
    out = matmul(spmm(a_hat, h), w)
    if activation == "relu":
        return relu(out)
    if activation == "linear":
        return out
    raise ValueError(f"unknown activation {activation!r}")


def gat_layer(h, edge_index, edge_feats, w, w_e, a, negative_slope=0.2,
              return_attention=False):
    """Single-head attention aggregation over directed messages.

    `edge_index` is a (2, E) int array of src -> dst messages (undirected
    graphs pass both directions); a self-loop per node is appended
    internally with zero edge features. Logits follow
    LeakyReLU(a . [W h_dst | W h_src | W_e x_edge]) and are softmaxed over
    each destination's incoming messages; the output row for node i is
    sum_j alpha_ij (W h_j).
    """
    if not isinstance(h, Tensor):
        h = Tensor(h)
    edge_index = np.asarray(edge_index, dtype=np.int64)
    if edge_index.ndim != 2 or edge_index.shape[0] != 2:
        raise DimensionError(f"edge_index must be (2, E), got {edge_index.shape}")
    n = h.data.shape[0]
    if edge_index.size and (edge_index.min() < 0 or edge_index.max() >= n):
        raise InputError(f"edge index out of range for {n} nodes")

    ef = np.asarray(edge_feats.data if isinstance(edge_feats, Tensor) else edge_feats,
                    dtype=np.float64)
    ef = ef.reshape(edge_index.shape[1], -1) if ef.size else np.zeros((0, w_e.data.shape[0]))
    if ef.shape[1] != w_e.data.shape[0]:
        raise DimensionError(f"edge features width {ef.shape[1]} does not match "
                             f"W_e input {w_e.data.shape[0]}")

    d = w.data.shape[1]
    de = w_e.data.shape[1]
    if a.data.shape != (2 * d + de, 1):
        raise DimensionError(f"attention vector must be ({2 * d + de}, 1), got {a.data.shape}")

    loops = np.arange(n, dtype=np.int64)
    src = np.concatenate([edge_index[0], loops])
    dst = np.concatenate([edge_index[1], loops])
    ef_aug = np.vstack([ef, np.zeros((n, ef.shape[1]))])

    hw = matmul(h, w)
    ew = matmul(Tensor(ef_aug), w_e)
    a_dst = slice_rows(a, 0, d)
    a_src = slice_rows(a, d, 2 * d)
    a_edge = slice_rows(a, 2 * d, 2 * d + de)

    logits = add(add(matmul(gather_rows(hw, dst), a_dst),
                     matmul(gather_rows(hw, src), a_src)),
                 matmul(ew, a_edge))
    logits = leaky_relu(logits, negative_slope)

    # Detached per-destination max: softmax is invariant to the shift, so
    # treating it as a constant is exact.
    shift = kernels.segment_max(logits.data, dst, n, fill=0.0)
    expd = exp(sub(logits, shift[dst].reshape(-1, 1)))
    denom = segment_sum(expd, dst, n)
    alpha = div(expd, gather_rows(denom, dst))
    out = segment_sum(mul(alpha, gather_rows(hw, src)), dst, n)
    if return_attention:
        return out, alpha.data.ravel().copy(), src.copy(), dst.copy()
    return out


def inner_product_decode(z, pairs):
    """Edge probabilities sigmoid(z_u . z_v) for each (u, v) pair."""
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise DimensionError(f"pairs must be (P, 2), got {pairs.shape}")
    n = z.data.shape[0]
    if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
        raise InputError(f"pair index out of range for {n} latent rows")
    zu = gather_rows(z, pairs[:, 0])
    zv = gather_rows(z, pairs[:, 1])
    return sigmoid(tsum(mul(zu, zv), axis=1))
