"""Hot numeric kernels with a compiled core and a pure-Python fallback.

The Cython extension is preferred when it was built; otherwise the numpy
fallback is used transparently. Set ``NEXTCELL_KERNELS=python`` to force the
fallback or ``NEXTCELL_KERNELS=cython`` to require the extension.
"""

import os
from contextlib import contextmanager

import numpy as np

from . import _pykern

_requested = os.environ.get("NEXTCELL_KERNELS", "").strip().lower()
_impl = None
if _requested in ("", "cython", "c"):
    try:
        from . import _ckern as _impl
    except ImportError:
        if _requested:
            raise ImportError(
                "NEXTCELL_KERNELS=cython but the compiled kernel module is not built"
            )
        _impl = None
if _impl is None:
    _impl = _pykern

BACKEND = "python" if _impl is _pykern else "cython"


def implementations():
    """Available kernel implementations keyed by backend name."""
    impls = {"python": _pykern}
    try:
        from . import _ckern
        impls["cython"] = _ckern
    except ImportError:
        pass
    return impls


@contextmanager
def forced_backend(name):
    """Temporarily route the default kernel dispatch through one backend."""
    global _impl, BACKEND
    impls = implementations()
    if name not in impls:
        raise KeyError(f"backend {name!r} not available (have {sorted(impls)})")
    saved = (_impl, BACKEND)
    _impl, BACKEND = impls[name], name
    try:
        yield
    finally:
        _impl, BACKEND = saved


def _as_f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _as_i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def segment_sum(values, seg, n, impl=None):
    """Sum rows of `values` into `n` buckets selected by `seg`."""
    impl = impl or _impl
    values = _as_f64(values)
    seg = _as_i64(seg)
    if values.ndim == 1:
        return impl.segment_sum_1d(values, seg, n)
    if values.ndim == 2:
        return impl.segment_sum_2d(values, seg, n)
    raise ValueError("segment_sum supports 1-D or 2-D values")


def segment_max(values, seg, n, fill=0.0, impl=None):
    """Per-bucket maximum of a 1-D array; empty buckets keep `fill`."""
    impl = impl or _impl
    return impl.segment_max_1d(_as_f64(values).ravel(), _as_i64(seg), n, float(fill))


def bfs_distances(indptr, indices, start, max_depth=-1, blocked=-1,
                  skip_edge=None, impl=None):
    """Hop distances from `start` over a CSR adjacency; -1 marks unreachable.

    `blocked` removes one node entirely; `skip_edge` removes one undirected
    edge; `max_depth` >= 0 truncates the search.
    """
    impl = impl or _impl
    skip_a, skip_b = (-1, -1) if skip_edge is None else skip_edge
    return impl.bfs_distances(_as_i64(indptr), _as_i64(indices), int(start),
                              int(max_depth), int(blocked), int(skip_a), int(skip_b))
