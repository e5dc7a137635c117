"""Common Neighbours, Jaccard and Adamic/Adar scoring over the 2-hop pair stream."""
from __future__ import annotations

import warnings

import numpy as np

from . import kernels
from .graph import Graph, WaldoWarning, two_hop_arrays

KINDS = ("CN", "JS", "AA")


def _kind(kind: str) -> str:
    k = kind.upper()
    if k not in KINDS:
        raise ValueError(f"unknown heuristic {kind!r}; expected one of {KINDS}")
    return k


def adamic_adar_weights(degrees: np.ndarray) -> np.ndarray:
    """Per-node AA weight 1/ln(deg).

    Degree-1 nodes would divide by ln 1 = 0; they get 1/ln(deg + 1) instead.
    A shared neighbour always has degree >= 2, so pair scores are unaffected.
    """
    d = np.asarray(degrees, dtype=np.float64)
    # deg 1 -> ln(2) = ln(deg + 1); deg 0 never appears as a neighbour
    return 1.0 / np.log(np.maximum(d, 2.0))


def _weights(g: Graph, kind: str) -> np.ndarray:
    if kind == "AA":
        return adamic_adar_weights(g.degrees)
    return np.ones(g.n)


def _finish(g: Graph, kind: str, us, vs, cn, ws) -> np.ndarray:
    if kind == "CN":
        return cn.astype(np.float64)
    if kind == "AA":
        return ws
    deg = g.degrees
    union = deg[us] + deg[vs] - cn
    out = np.zeros(len(us), dtype=np.float64)
    nz = union > 0
    out[nz] = cn[nz] / union[nz]
    return out


def score_pairs(g: Graph, kind: str, us, vs) -> np.ndarray:
    """Vectorised exact heuristic values for arbitrary pairs."""
    kind = _kind(kind)
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    if len(us) == 0:
        return np.zeros(0)
    if g.bipartite:
        return np.zeros(len(us))
    cn, ws = kernels.pair_common(g.indptr, g.indices, _weights(g, kind), us, vs)
    return _finish(g, kind, us, vs, cn, ws)


def score(g: Graph, kind: str, pair: tuple[int, int]) -> float:
    u, v = pair
    g._check(u)
    g._check(v)
    if u == v:
        raise ValueError("a pair needs two distinct nodes")
    return float(score_pairs(g, kind, [u], [v])[0])


def ranking_order(scores: np.ndarray, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Indices sorting by score descending, then canonical pair ascending."""
    return np.lexsort((vs, us, -scores))


def two_hop_scores(g: Graph, kind: str, start: int = 0, stop: int | None = None):
    """``(us, vs, scores)`` for unlinked 2-hop pairs with sources in ``[start, stop)``."""
    kind = _kind(kind)
    us, vs, cn, ws = two_hop_arrays(g, _weights(g, kind), start, stop)
    return us, vs, _finish(g, kind, us, vs, cn, ws)


def rank_two_hop(g: Graph, kind: str):
    """The full 2-hop universe ranked best-first."""
    us, vs, s = two_hop_scores(g, kind)
    order = ranking_order(s, us, vs)
    return us[order], vs[order], s[order]


def top_k_heuristic(g: Graph, kind: str, k: int, block: int = 2048):
    """Top-``k`` unlinked pairs by heuristic score over the 2-hop stream.

    Sources are processed in blocks and merged into a running best-``k``
    buffer, so memory stays O(k + block output).
    """
    kind = _kind(kind)
    if k < 1:
        raise ValueError("k must be >= 1")
    empty = (np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0))
    if g.bipartite:
        warnings.warn(
            f"{kind} scores are zero on every cross-side pair of a bipartite graph; "
            "returning no pairs",
            WaldoWarning,
            stacklevel=2,
        )
        return empty
    best_u, best_v, best_s = empty
    for start in range(0, g.n, block):
        us, vs, s = two_hop_scores(g, kind, start, min(g.n, start + block))
        us = np.concatenate([best_u, us])
        vs = np.concatenate([best_v, vs])
        s = np.concatenate([best_s, s])
        order = ranking_order(s, us, vs)[:k]
        best_u, best_v, best_s = us[order], vs[order], s[order]
    if len(best_u) < k:
        warnings.warn(
            f"only {len(best_u)} pairs lie within two hops; fewer than k={k}",
            WaldoWarning,
            stacklevel=2,
        )
    return best_u, best_v, best_s
