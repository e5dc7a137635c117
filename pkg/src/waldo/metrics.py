"""Recall and precision of a candidate set against held-out edges."""
from __future__ import annotations

import numpy as np


def _keys(pairs, n: int) -> np.ndarray:
    p = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    lo, hi = np.minimum(p[:, 0], p[:, 1]), np.maximum(p[:, 0], p[:, 1])
    return np.unique(lo * n + hi)


def hits(candidates, test, n: int | None = None) -> int:
    """Number of test pairs present in the candidate set (orientation ignored)."""
    c = np.asarray(candidates, dtype=np.int64).reshape(-1, 2)
    t = np.asarray(test, dtype=np.int64).reshape(-1, 2)
    if n is None:
        n = int(max(c.max(initial=-1), t.max(initial=-1))) + 1
    return int(np.intersect1d(_keys(c, n), _keys(t, n), assume_unique=True).size)


def recall_at_k(candidates, test, n: int | None = None) -> float:
    t = np.asarray(test).reshape(-1, 2)
    if len(t) == 0:
        raise ValueError("recall is undefined for an empty test set")
    return hits(candidates, t, n) / len(_keys(t, int(t.max()) + 1))


def precision_at_k(candidates, test, n: int | None = None) -> float:
    c = np.asarray(candidates).reshape(-1, 2)
    if len(c) == 0:
        raise ValueError("precision is undefined for an empty candidate set")
    return hits(c, test, n) / len(c)
