"""Named parameter collections, Adam updates, and checkpoint I/O."""

from __future__ import annotations

import json

import numpy as np

from ..errors import OptimizerError
from .tensor import Tensor

CHECKPOINT_FORMAT = "nextcell-ckpt"
CHECKPOINT_VERSION = 1


class ModelState:
    """Named parameter tensors plus per-parameter Adam moment buffers."""

    def __init__(self, params):
        self.params = {name: p if isinstance(p, Tensor) else Tensor(p)
                       for name, p in params.items()}
        self.m = {name: np.zeros_like(p.data) for name, p in self.params.items()}
        self.v = {name: np.zeros_like(p.data) for name, p in self.params.items()}
        self.step = 0

    def __getitem__(self, name):
        return self.params[name]

    def names(self):
        return list(self.params)

    def snapshot(self):
        """Copy of the parameter values only (moments excluded)."""
        return {name: p.data.copy() for name, p in self.params.items()}

    def restore(self, snap):
        for name, value in snap.items():
            self.params[name].data = value.copy()


def adam_step(state, grads, lr, weight_decay=0.0, beta1=0.9, beta2=0.999, eps=1e-8):
    """One Adam update with bias correction; L2 is added to the gradients.

    `grads` maps parameter names to arrays of matching shape. The state is
    updated in place and returned.
    """
    t = state.step + 1
    for name, p in state.params.items():
        g = grads.get(name)
        if g is None:
            raise OptimizerError(f"missing gradient for parameter {name!r}")
        g = np.asarray(g, dtype=np.float64)
        if g.shape != p.data.shape:
            raise OptimizerError(f"gradient shape {g.shape} does not match "
                                 f"parameter {name!r} shape {p.data.shape}")
        if not np.all(np.isfinite(g)):
            raise OptimizerError(f"non-finite gradient for parameter {name!r}")
        if weight_decay:
            g = g + weight_decay * p.data
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        p.data -= lr * m_hat / (np.sqrt(v_hat) + eps)
    state.step = t
    return state


def save_state(path, state, meta=None):
    """Write a versioned checkpoint: named parameters, moments, metadata."""
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "step": state.step,
        "names": state.names(),
        "meta": meta or {},
    }
    arrays = {"__header__": np.frombuffer(json.dumps(header).encode(), dtype=np.uint8)}
    for name, p in state.params.items():
        arrays[f"p::{name}"] = p.data
        arrays[f"m::{name}"] = state.m[name]
        arrays[f"v::{name}"] = state.v[name]
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_state(path):
    """Read a checkpoint written by save_state; returns (state, meta)."""
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(bytes(data["__header__"]).decode())
        if header.get("format") != CHECKPOINT_FORMAT:
            raise OptimizerError(f"{path}: not a recognized checkpoint")
        if header.get("version") != CHECKPOINT_VERSION:
            raise OptimizerError(f"{path}: unsupported checkpoint version "
                                 f"{header.get('version')}")
        state = ModelState({name: data[f"p::{name}"] for name in header["names"]})
        for name in header["names"]:
            state.m[name] = data[f"m::{name}"].copy()
            state.v[name] = data[f"v::{name}"].copy()
        state.step = int(header["step"])
    return state, header["meta"]
