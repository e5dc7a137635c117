"""Backend selection for the hot loops.

The compiled extension is used when importable; setting ``WALDO_PURE_PYTHON=1``
forces the numpy fallback. ``BACKEND`` names whichever was picked.
"""
import os
from contextlib import contextmanager

import numpy as np

from . import _pykernels

python_backend = _pykernels

if os.environ.get("WALDO_PURE_PYTHON"):
    compiled_backend = None
else:
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        compiled_backend = None

active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if active is compiled_backend else "python"


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def _i32(a):
    return np.ascontiguousarray(a, dtype=np.int32)


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def available_backends():
    backends = {"python": python_backend}
    if compiled_backend is not None:
        backends["cython"] = compiled_backend
    return backends


def two_hop(indptr, indices, weights, start, stop):
    return active.two_hop(_i64(indptr), _i32(indices), _f64(weights), int(start), int(stop))


def pair_common(indptr, indices, weights, us, vs):
    return active.pair_common(_i64(indptr), _i32(indices), _f64(weights), _i64(us), _i64(vs))


def has_edges(indptr, indices, us, vs):
    return active.has_edges(_i64(indptr), _i32(indices), _i64(us), _i64(vs))


def bucket_pairs(lcodes, lnodes, rcodes, rnodes, diagonal, total):
    return active.bucket_pairs(
        _i64(lcodes), _i64(lnodes), _i64(rcodes), _i64(rnodes), bool(diagonal), int(total)
    )


@contextmanager
def use_backend(name: str):
    """Temporarily route every kernel call through backend ``name``."""
    global active
    backends = available_backends()
    if name not in backends:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(backends)}")
    previous = active
    active = backends[name]
    try:
        yield active
    finally:
        active = previous
