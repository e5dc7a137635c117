"""Slow, obviously-correct reference implementations used by the tests.

Everything here works on Python sets and dicts, independent of the CSR
arrays and kernels in the package.
"""
from __future__ import annotations

import itertools
import math
import warnings

import numpy as np

from waldo.graph import Graph


def random_graph(n: int, p: float, seed: int, **kw) -> Graph:
    rng = np.random.default_rng(seed)
    a, b = np.triu_indices(n, k=1)
    keep = rng.random(len(a)) < p
    return Graph.from_edges(n, a[keep], b[keep], **kw)


def noisy_graph(n: int, m: int, seed: int) -> Graph:
    """Random multigraph with loops, cleaned by the constructor."""
    rng = np.random.default_rng(seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return Graph.from_edges(n, rng.integers(0, n, m), rng.integers(0, n, m))


def adjacency(g: Graph) -> dict[int, set[int]]:
    adj = {v: set() for v in range(g.n)}
    for u, v in g.edges.tolist():
        adj[u].add(v)
        adj[v].add(u)
    return adj


def cn(adj, u, v) -> int:
    return len(adj[u] & adj[v])


def js(adj, u, v) -> float:
    union = adj[u] | adj[v]
    return len(adj[u] & adj[v]) / len(union) if union else 0.0


def aa(adj, u, v) -> float:
    total = 0.0
    for w in sorted(adj[u] & adj[v]):
        d = len(adj[w])
        total += 1.0 / math.log(d if d > 1 else d + 1)
    return total


SCORERS = {"CN": cn, "JS": js, "AA": aa}


def unlinked_pairs(adj, n):
    for u, v in itertools.combinations(range(n), 2):
        if v not in adj[u]:
            yield u, v


def two_hop(adj, n) -> set[tuple[int, int]]:
    return {(u, v) for u, v in unlinked_pairs(adj, n) if adj[u] & adj[v]}


def top_k(adj, n, score, k, universe=None):
    """Rank ``universe`` (default: all unlinked pairs) by (-score, u, v)."""
    pairs = list(unlinked_pairs(adj, n)) if universe is None else sorted(universe)
    scored = sorted(((-score(u, v), u, v) for u, v in pairs))
    return [(u, v) for _, u, v in scored[:k]], [-s for s, _, _ in scored[:k]]


def classes_by_signature(membership: np.ndarray) -> dict:
    """Class key -> set of pairs, by looking at every pair."""
    sig = [tuple(int(x) for x in row) for row in np.atleast_2d(membership.T).T]
    out: dict = {}
    for u, v in itertools.combinations(range(len(sig)), 2):
        key = tuple(sorted((sig[u], sig[v])))
        out.setdefault(key, set()).add((u, v))
    return out
