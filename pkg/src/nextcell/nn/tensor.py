"""Dense float64 tensors with reverse-mode gradients recorded on a Tape.

Every primitive op executed while a Tape is active appends one entry
(output, parents, local backward). Entries are replayed in reverse
execution order, which is already a topological order, so no sort is
needed. Ops executed with no active tape just compute values.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import DimensionError, InputError, NonFiniteError

_ACTIVE_TAPE = None


class Tensor:
    """A numpy float64 array plus a gradient slot filled by Tape.backward."""

    __slots__ = ("data", "grad")

    def __init__(self, data):
        arr = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("tensor contains NaN or Inf")
        self.data = arr
        self.grad = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def item(self):
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return neg(self)

    def __truediv__(self, other):
        return div(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


class Tape:
    """Execution-ordered record of primitive ops for one forward pass."""

    def __init__(self):
        self._entries = []
        self._outer = None

    def __enter__(self):
        global _ACTIVE_TAPE
        self._outer = _ACTIVE_TAPE
        _ACTIVE_TAPE = self
        return self

    def __exit__(self, exc_type, exc, tb):
        global _ACTIVE_TAPE
        _ACTIVE_TAPE = self._outer
        return False

    def __len__(self):
        return len(self._entries)

    def backward(self, loss):
        """Populate .grad with d(loss)/d(tensor) for every recorded tensor.

        Every tensor touched by this tape has its .grad reset first, so a
        recorded tensor that did not contribute to the loss reads None
        rather than a stale value from an earlier pass.
        """
        if loss.data.size != 1:
            raise DimensionError(f"backward needs a scalar loss, got shape {loss.data.shape}")
        registry = {id(loss): loss}
        for out, parents, _ in self._entries:
            registry[id(out)] = out
            for p in parents:
                registry[id(p)] = p
        for t in registry.values():
            t.grad = None
        grads = {id(loss): np.ones_like(loss.data)}
        for out, parents, backward in reversed(self._entries):
            g = grads.pop(id(out), None)
            if g is None:
                continue
            out.grad = g
            for parent, pgrad in zip(parents, backward(g)):
                if pgrad is None:
                    continue
                acc = grads.get(id(parent))
                grads[id(parent)] = pgrad if acc is None else acc + pgrad
        for tid, g in grads.items():
            registry[tid].grad = g


def _record(out, parents, backward):
    if _ACTIVE_TAPE is not None:
        _ACTIVE_TAPE._entries.append((out, parents, backward))
    return out


def _const(x):
    return np.asarray(x, dtype=np.float64)


def _unbroadcast(grad, shape):
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, size in enumerate(shape):
        if size == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


def add(x, y):
    if isinstance(y, Tensor):
        out = Tensor(x.data + y.data)
        return _record(out, (x, y), lambda g: (_unbroadcast(g, x.data.shape),
                                               _unbroadcast(g, y.data.shape)))
    yv = _const(y)
    out = Tensor(x.data + yv)
    return _record(out, (x,), lambda g: (_unbroadcast(g, x.data.shape),))


def sub(x, y):
    if isinstance(y, Tensor):
        out = Tensor(x.data - y.data)
        return _record(out, (x, y), lambda g: (_unbroadcast(g, x.data.shape),
                                               _unbroadcast(-g, y.data.shape)))
    yv = _const(y)
    out = Tensor(x.data - yv)
    return _record(out, (x,), lambda g: (_unbroadcast(g, x.data.shape),))


def neg(x):
    out = Tensor(-x.data)
    return _record(out, (x,), lambda g: (-g,))


def mul(x, y):
    if isinstance(y, Tensor):
        xd, yd = x.data, y.data
        out = Tensor(xd * yd)
        return _record(out, (x, y), lambda g: (_unbroadcast(g * yd, xd.shape),
                                               _unbroadcast(g * xd, yd.shape)))
    yv = _const(y)
    out = Tensor(x.data * yv)
    return _record(out, (x,), lambda g: (_unbroadcast(g * yv, x.data.shape),))


def div(x, y):
    if isinstance(y, Tensor):
        xd, yd = x.data, y.data
        out = Tensor(xd / yd)
        return _record(out, (x, y), lambda g: (_unbroadcast(g / yd, xd.shape),
                                               _unbroadcast(-g * xd / (yd * yd), yd.shape)))
    yv = _const(y)
    out = Tensor(x.data / yv)
    return _record(out, (x,), lambda g: (_unbroadcast(g / yv, x.data.shape),))


def matmul(x, y):
    if not isinstance(x, Tensor):
        x = Tensor(x)
    if not isinstance(y, Tensor):
        y = Tensor(y)
    xd, yd = x.data, y.data
    if xd.ndim != 2 or yd.ndim != 2 or xd.shape[1] != yd.shape[0]:
        raise DimensionError(f"matmul shapes do not conform: {xd.shape} @ {yd.shape}")
    out = Tensor(xd @ yd)
    return _record(out, (x, y), lambda g: (g @ yd.T, xd.T @ g))


def spmm(a, x):
    """Multiply a constant scipy sparse matrix by a dense tensor."""
    if a.shape[1] != x.data.shape[0]:
        raise DimensionError(f"spmm shapes do not conform: {a.shape} @ {x.data.shape}")
    at = a.T.tocsr()
    out = Tensor(a @ x.data)
    return _record(out, (x,), lambda g: (at @ g,))


def gather_rows(x, idx):
    """Select rows of a 2-D (or entries of a 1-D) tensor."""
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    n = x.data.shape[0]
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise InputError(f"row index out of range for {n} rows")
    out = Tensor(x.data[idx])
    return _record(out, (x,), lambda g: (kernels.segment_sum(g, idx, n),))


def segment_sum(x, seg, n):
    """Sum tensor rows into `n` buckets selected by the constant `seg`."""
    seg = np.ascontiguousarray(seg, dtype=np.int64)
    out = Tensor(kernels.segment_sum(x.data, seg, n))
    return _record(out, (x,), lambda g: (g[seg],))


def slice_rows(x, lo, hi):
    out = Tensor(x.data[lo:hi])

    def backward(g):
        full = np.zeros_like(x.data)
        full[lo:hi] = g
        return (full,)

    return _record(out, (x,), backward)


def reshape(x, shape):
    old = x.data.shape
    out = Tensor(x.data.reshape(shape))
    return _record(out, (x,), lambda g: (g.reshape(old),))


def relu(x):
    mask = x.data > 0
    out = Tensor(np.where(mask, x.data, 0.0))
    return _record(out, (x,), lambda g: (g * mask,))


def leaky_relu(x, slope=0.2):
    factor = np.where(x.data > 0, 1.0, slope)
    out = Tensor(x.data * factor)
    return _record(out, (x,), lambda g: (g * factor,))


def sigmoid(x):
    xd = x.data
    s = np.where(xd >= 0, 1.0 / (1.0 + np.exp(-np.abs(xd))),
                 np.exp(-np.abs(xd)) / (1.0 + np.exp(-np.abs(xd))))
    out = Tensor(s)
    return _record(out, (x,), lambda g: (g * s * (1.0 - s),))


def exp(x):
    e = np.exp(x.data)
    out = Tensor(e)
    return _record(out, (x,), lambda g: (g * e,))


def log(x):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = Tensor(np.log(x.data))  # nonpositive input trips the finite check
    return _record(out, (x,), lambda g: (g / x.data,))


def softplus(x):
    """log(1 + e^x) computed without overflow."""
    xd = x.data
    out = Tensor(np.maximum(xd, 0.0) + np.log1p(np.exp(-np.abs(xd))))
    s = np.where(xd >= 0, 1.0 / (1.0 + np.exp(-np.abs(xd))),
                 np.exp(-np.abs(xd)) / (1.0 + np.exp(-np.abs(xd))))
    return _record(out, (x,), lambda g: (g * s,))


def clip(x, lo, hi):
    """Clamp values; gradient passes through strictly inside [lo, hi]."""
    inside = (x.data > lo) & (x.data < hi)
    out = Tensor(np.clip(x.data, lo, hi))
    return _record(out, (x,), lambda g: (g * inside,))


def tsum(x, axis=None, keepdims=False):
    out = Tensor(x.data.sum(axis=axis, keepdims=keepdims))

    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, x.data.shape).copy(),)
        ge = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(ge, x.data.shape).copy(),)

    return _record(out, (x,), backward)


def tmean(x, axis=None, keepdims=False):
    count = x.data.size if axis is None else x.data.shape[axis]
    return mul(tsum(x, axis=axis, keepdims=keepdims), 1.0 / count)
