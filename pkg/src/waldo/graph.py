"""Immutable undirected graphs in CSR form.

Nodes are dense indices ``0..n-1``; external labels are kept only to map
back at I/O boundaries. Edges are stored once as canonical ``(u, v)`` with
``u < v`` in lexicographic order, and twice in the sorted adjacency.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import kernels


class WaldoWarning(UserWarning):
    """Recoverable data problem (dropped self-loops, missing embeddings, ...)."""


class EdgeListError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    indptr: np.ndarray
    indices: np.ndarray
    edges: np.ndarray
    timestamps: np.ndarray | None = None
    labels: list[str] | None = None
    bipartite: bool = False
    dropped_self_loops: int = 0
    dropped_duplicates: int = 0
    _label_index: dict = field(default=None, repr=False)

    @classmethod
    def from_edges(
        cls,
        n: int,
        us: Sequence[int],
        vs: Sequence[int],
        timestamps: Sequence[int] | None = None,
        labels: Sequence[str] | None = None,
        bipartite: bool = False,
    ) -> "Graph":
        """Build a simple graph, dropping self-loops and collapsing multi-edges.

        A duplicated edge keeps its earliest timestamp.
        """
        us = np.asarray(us, dtype=np.int64).ravel()
        vs = np.asarray(vs, dtype=np.int64).ravel()
        if us.shape != vs.shape:
            raise ValueError("endpoint arrays differ in length")
        if len(us) and (min(us.min(), vs.min()) < 0 or max(us.max(), vs.max()) >= n):
            raise ValueError("edge endpoint out of range")
        ts = None if timestamps is None else np.asarray(timestamps, dtype=np.int64).ravel()
        loops = us == vs
        n_loops = int(loops.sum())
        us, vs = us[~loops], vs[~loops]
        if ts is not None:
            ts = ts[~loops]
        lo, hi = np.minimum(us, vs), np.maximum(us, vs)
        keys = lo * n + hi
        if ts is not None:
            order = np.lexsort((ts, keys))
        else:
            order = np.argsort(keys, kind="stable")
        keys = keys[order]
        first = np.ones(len(keys), dtype=bool)
        first[1:] = keys[1:] != keys[:-1]
        n_dup = int(len(keys) - first.sum())
        keys = keys[first]
        if ts is not None:
            ts = ts[order][first]
        edges = np.stack([keys // n, keys % n], axis=1) if n else np.empty((0, 2), np.int64)
        edges = edges.reshape(-1, 2).astype(np.int64)

        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        indices = dst[order].astype(np.int32)
        labels = None if labels is None else [str(x) for x in labels]
        if labels is not None and len(labels) != n:
            raise ValueError("label count does not match node count")
        if n_loops or n_dup:
            warnings.warn(
                f"dropped {n_loops} self-loop(s) and {n_dup} duplicate edge(s)",
                WaldoWarning,
                stacklevel=2,
            )
        return cls(
            indptr=indptr,
            indices=indices,
            edges=edges,
            timestamps=ts,
            labels=labels,
            bipartite=bipartite,
            dropped_self_loops=n_loops,
            dropped_duplicates=n_dup,
        )

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def m(self) -> int:
        return len(self.edges)

    node_count = n
    edge_count = m

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def degree(self, v: int) -> int:
        self._check(v)
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        self._check(v)
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        self._check(u)
        self._check(v)
        return bool(kernels.has_edges(self.indptr, self.indices, [u], [v])[0])

    def has_edges(self, us, vs) -> np.ndarray:
        """Vectorised edge membership test."""
        us = np.asarray(us, dtype=np.int64)
        if len(us) == 0:
            return np.zeros(0, dtype=bool)
        return kernels.has_edges(self.indptr, self.indices, us, vs)

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)

    def index_of(self, label: str) -> int:
        if self._label_index is None:
            names = self.labels if self.labels is not None else [str(i) for i in range(self.n)]
            object.__setattr__(self, "_label_index", {x: i for i, x in enumerate(names)})
        return self._label_index[str(label)]

    def subgraph_without(self, edge_mask: np.ndarray) -> "Graph":
        """Same node set, keeping only ``edges[edge_mask]``."""
        kept = self.edges[edge_mask]
        ts = None if self.timestamps is None else self.timestamps[edge_mask]
        return Graph.from_edges(
            self.n, kept[:, 0], kept[:, 1], timestamps=ts,
            labels=self.labels, bipartite=self.bipartite,
        )

    def _check(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise IndexError(f"node {v} out of range [0, {self.n})")


def load_edge_list(
    path: str | Path, weighted_timestamps: bool = False, bipartite: bool = False
) -> Graph:
    """Read ``u v`` (or ``u v t``) lines; labels get indices in first-seen order."""
    want = 3 if weighted_timestamps else 2
    index: dict[str, int] = {}
    us: list[int] = []
    vs: list[int] = []
    ts: list[int] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) != want:
                raise EdgeListError(
                    f"{path}:{lineno}: expected {want} fields, got {len(tokens)}"
                )
            a, b = tokens[0], tokens[1]
            if weighted_timestamps:
                try:
                    ts.append(int(tokens[2]))
                except ValueError:
                    raise EdgeListError(
                        f"{path}:{lineno}: timestamp {tokens[2]!r} is not an integer"
                    ) from None
            if a == b and a not in index:
                # a self-loop alone does not introduce a node
                us.append(-1)
                vs.append(-1)
                continue
            for tok in (a, b):
                if tok not in index:
                    index[tok] = len(index)
            us.append(index[a])
            vs.append(index[b])
    if not index:
        raise EdgeListError(f"{path}: no edges")
    us_arr = np.asarray(us, dtype=np.int64)
    vs_arr = np.asarray(vs, dtype=np.int64)
    ts_arr = np.asarray(ts, dtype=np.int64) if weighted_timestamps else None
    orphan = us_arr < 0
    if orphan.any():
        # keep them as self-loops on node 0 so they are counted and dropped
        us_arr[orphan] = 0
        vs_arr[orphan] = 0
    labels = list(index)
    return Graph.from_edges(len(labels), us_arr, vs_arr, timestamps=ts_arr,
                            labels=labels, bipartite=bipartite)


def write_edge_list(g: Graph, path: str | Path, edges: np.ndarray | None = None) -> None:
    """Write ``edges`` (default: all of ``g``) using external labels."""
    edges = g.edges if edges is None else np.asarray(edges).reshape(-1, 2)
    with open(path, "w", encoding="utf-8") as fh:
        for i, (u, v) in enumerate(edges.tolist()):
            if g.timestamps is not None and edges is g.edges:
                fh.write(f"{g.label(u)} {g.label(v)} {int(g.timestamps[i])}\n")
            else:
                fh.write(f"{g.label(u)} {g.label(v)}\n")


def neighbors(g: Graph, v: int) -> np.ndarray:
    return g.neighbors(v)


def two_hop_arrays(
    g: Graph, weights: np.ndarray | None = None, start: int = 0, stop: int | None = None
):
    """All unlinked pairs with a shared neighbour, sorted by ``(u, v)``.

    Returns ``(us, vs, common, weighted)`` where ``weighted`` sums
    ``weights[w]`` over shared neighbours ``w`` (unit weights by default).
    """
    stop = g.n if stop is None else stop
    if weights is None:
        weights = np.ones(g.n)
    us, vs, cn, ws = kernels.two_hop(g.indptr, g.indices, weights, start, stop)
    order = np.lexsort((vs, us))
    return (us[order].astype(np.int64), vs[order].astype(np.int64), cn[order], ws[order])


def two_hop_pairs(g: Graph, block: int = 4096) -> Iterator[tuple[int, int]]:
    """Stream every unlinked pair within two hops exactly once, as ``u < v``."""
    for start in range(0, g.n, block):
        us, vs, _, _ = two_hop_arrays(g, start=start, stop=min(g.n, start + block))
        yield from zip(us.tolist(), vs.tolist())
