"""Training losses built from tape primitives."""

from __future__ import annotations

import numpy as np

from .tensor import add, clip, exp, log, mul, neg, reshape, softplus, tmean, tsum

_EPS = 1e-12


def bce(pred, labels):
    """Mean binary cross-entropy of probabilities against 0/1 labels.

    Predictions are clamped to [1e-12, 1 - 1e-12] before the logs so exact
    0/1 inputs stay finite.
    """
    y = np.asarray(labels, dtype=np.float64)
    p = clip(pred, _EPS, 1.0 - _EPS)
    pos = mul(log(p), y)
    negterm = mul(log(add(neg(p), 1.0)), 1.0 - y)
    return neg(tmean(add(pos, negterm)))


def kl_divergence(mu, logstd):
    """KL(N(mu, e^logstd) || N(0, I)), summed over dims, averaged over rows."""
    two_logstd = mul(logstd, 2.0)
    inner = add(add(add(two_logstd, 1.0), neg(mul(mu, mu))), neg(exp(two_logstd)))
    per_row = tsum(inner, axis=1) if mu.data.ndim > 1 else inner
    return mul(tmean(per_row), -0.5)


def cross_entropy(logits, labels):
    """Two-class cross-entropy from a single logit per sample.

    The two class scores are (0, logit), so this equals binary
    cross-entropy with a sigmoid link, computed stably via softplus.
    """
    y = np.asarray(labels, dtype=np.float64)
    flat = logits if logits.data.ndim == 1 else reshape(logits, (-1,))
    pos = mul(softplus(neg(flat)), y)
    negterm = mul(softplus(flat), 1.0 - y)
    return tmean(add(pos, negterm))
