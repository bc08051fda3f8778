"""Finite-difference validation of the reverse-mode gradients."""

from __future__ import annotations

import numpy as np

from .tensor import Tape


def grad_check(f, params, h=1e-5):
    """Max relative error between tape gradients and central differences.

    `f` maps the parameter dict to a scalar Tensor and must be
    deterministic (draw any noise once, outside f). Coordinates where both
    gradients are below 1e-7 in magnitude are skipped: central differences
    carry no precision there.
    """
    with Tape() as tape:
        loss = f(params)
    tape.backward(loss)
    analytic = {}
    for name, p in params.items():
        g = p.grad
        analytic[name] = np.zeros_like(p.data) if g is None else np.array(g, copy=True)

    worst = 0.0
    for name, p in params.items():
        flat = p.data.ravel()
        aflat = analytic[name].ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            f_plus = f(params).item()
            flat[i] = orig - h
            f_minus = f(params).item()
            flat[i] = orig
            fd = (f_plus - f_minus) / (2.0 * h)
            scale = max(abs(aflat[i]), abs(fd))
            if scale < 1e-7:
                continue
            worst = max(worst, abs(aflat[i] - fd) / scale)
    return worst
