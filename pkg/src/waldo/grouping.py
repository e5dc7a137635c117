"""Node groupings and the equivalence classes they induce over node pairs.

A grouping is one or more partitions of the nodes. A node's joint membership
vector (one group id per constituent partition) is its *signature*; two pairs
are equivalent when their unordered signature pairs match, so each class is
``V_a x V_b`` (or the pairs inside ``V_a`` when ``a == b``).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from sklearn.cluster import KMeans

from .embeddings import EmbeddingMatrix
from .graph import Graph

LOG_EPS = 1e-12

ClassKey = tuple[tuple[int, ...], tuple[int, ...]]


@dataclass(frozen=True, eq=False)
class NodeGrouping:
    """``membership[v, j]`` is node v's group in constituent partition j."""

    membership: np.ndarray
    kind: str

    def __post_init__(self):
        m = np.asarray(self.membership, dtype=np.int64)
        if m.ndim == 1:
            m = m[:, None]
        object.__setattr__(self, "membership", m)

    @property
    def n(self) -> int:
        return self.membership.shape[0]

    @property
    def group_counts(self) -> list[int]:
        return [int(col.max()) + 1 if len(col) else 0 for col in self.membership.T]

    @property
    def group_count(self) -> int:
        return sum(self.group_counts)

    def write_csv(self, path: str | Path, g: Graph | None = None) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["node"] + [f"group_{j}" for j in range(self.membership.shape[1])])
            for v, row in enumerate(self.membership.tolist()):
                w.writerow([g.label(v) if g is not None else v] + row)


def _dense(ids: np.ndarray) -> np.ndarray:
    """Relabel ids to 0..k-1 keeping their order."""
    _, inv = np.unique(ids, return_inverse=True)
    return inv.astype(np.int64)


def degree_log_bins(g: Graph, bins: int) -> NodeGrouping:
    """Uniform bins over log-degree; isolated nodes share bin 0 with the lowest degrees."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    deg = g.degrees.astype(np.float64)
    out = np.zeros(g.n, dtype=np.int64)
    pos = deg > 0
    if pos.any():
        logd = np.log(deg[pos])
        lo, hi = logd.min(), logd.max()
        raw = np.floor(bins * (logd - lo) / (hi - lo + LOG_EPS)).astype(np.int64)
        out[pos] = np.clip(raw, 0, bins - 1)
    return NodeGrouping(_dense(out), "DG")


def cluster_embeddings(
    x: EmbeddingMatrix, clusters: int, seed: int = 0, kind: str = "SG"
) -> NodeGrouping:
    """k-means (k-means++ seeding, <= 100 Lloyd iterations) over embedding rows."""
    if clusters < 1:
        raise ValueError("clusters must be >= 1")
    if clusters > x.rows:
        raise ValueError(f"cannot form {clusters} clusters from {x.rows} nodes")
    data = x.data.toarray() if x.is_sparse else np.asarray(x.data)
    if clusters == 1:
        return NodeGrouping(np.zeros(x.rows, dtype=np.int64), kind)
    km = KMeans(
        n_clusters=clusters, init="k-means++", n_init=1, max_iter=100,
        tol=1e-4, random_state=seed,
    )
    labels = km.fit_predict(data)
    return NodeGrouping(_dense(labels), kind)


def combine(groupings: Sequence[NodeGrouping]) -> NodeGrouping:
    """Concatenate memberships; the joint vector keys the new classes."""
    if not groupings:
        raise ValueError("need at least one grouping")
    n = groupings[0].n
    if any(gr.n != n for gr in groupings):
        raise ValueError("groupings cover different node counts")
    kind = groupings[0].kind if len(groupings) == 1 else "MG"
    return NodeGrouping(np.hstack([gr.membership for gr in groupings]), kind)


@dataclass(frozen=True)
class ClassDecomposition:
    """One equivalence class as a Cartesian product ``left x right``.

    For a diagonal class (same signature on both sides) ``left is right`` and
    the class holds the ``C(|left|, 2)`` unordered pairs inside it.
    """

    key: ClassKey
    index: int
    left: np.ndarray
    right: np.ndarray
    pair_count: int

    @property
    def diagonal(self) -> bool:
        return self.key[0] == self.key[1]

    def pairs(self) -> np.ndarray:
        """All canonical pairs of the class (only for small classes)."""
        if self.diagonal:
            a, b = np.triu_indices(len(self.left), k=1)
            us, vs = self.left[a], self.left[b]
        else:
            us = np.repeat(self.left, len(self.right))
            vs = np.tile(self.right, len(self.left))
        lo, hi = np.minimum(us, vs), np.maximum(us, vs)
        order = np.lexsort((hi, lo))
        return np.stack([lo[order], hi[order]], axis=1)

    def iter_canonical(self, chunk: int = 65536) -> Iterator[np.ndarray]:
        """Canonical pairs in ascending ``(u, v)`` order, lazily, in chunks."""
        members = np.union1d(self.left, self.right)
        in_left = np.isin(members, self.left)
        buf: list[np.ndarray] = []
        size = 0
        for u, is_left in zip(members.tolist(), in_left.tolist()):
            if self.diagonal:
                partners = self.left[self.left > u]
            else:
                other = self.right if is_left else self.left
                partners = other[other > u]
            if len(partners) == 0:
                continue
            block = np.empty((len(partners), 2), dtype=np.int64)
            block[:, 0] = u
            block[:, 1] = partners
            buf.append(block)
            size += len(partners)
            if size >= chunk:
                yield np.concatenate(buf)
                buf, size = [], 0
        if buf:
            yield np.concatenate(buf)


class Partition:
    """Equivalence classes over all unordered pairs, indexed ``0..len-1``.

    Classes are ordered by key; empty classes are dropped. Decompositions are
    built on demand so very fine groupings stay cheap.
    """

    def __init__(self, grouping: NodeGrouping):
        sigs, inv = np.unique(grouping.membership, axis=0, return_inverse=True)
        self.grouping = grouping
        self.signature = inv.ravel().astype(np.int64)
        self.signatures = [tuple(int(x) for x in row) for row in sigs]
        n_sig = len(sigs)
        counts = np.bincount(self.signature, minlength=n_sig)
        order = np.argsort(self.signature, kind="stable")
        bounds = np.concatenate([[0], np.cumsum(counts)])
        self.members = [order[bounds[i]:bounds[i + 1]] for i in range(n_sig)]
        a, b = np.triu_indices(n_sig)
        sizes = np.where(a == b, counts[a] * (counts[a] - 1) // 2, counts[a] * counts[b])
        keep = sizes > 0
        self.class_a = a[keep].astype(np.int64)
        self.class_b = b[keep].astype(np.int64)
        self.pair_counts = sizes[keep].astype(np.int64)
        self._n_sig = n_sig
        self._codes = self.class_a * n_sig + self.class_b

    @property
    def n(self) -> int:
        return len(self.signature)

    def __len__(self) -> int:
        return len(self.class_a)

    def key(self, i: int) -> ClassKey:
        return (self.signatures[self.class_a[i]], self.signatures[self.class_b[i]])

    def __getitem__(self, i: int) -> ClassDecomposition:
        if not 0 <= i < len(self):
            raise IndexError(i)
        a, b = int(self.class_a[i]), int(self.class_b[i])
        left = self.members[a]
        right = left if a == b else self.members[b]
        return ClassDecomposition(self.key(i), i, left, right, int(self.pair_counts[i]))

    def __iter__(self) -> Iterator[ClassDecomposition]:
        for i in range(len(self)):
            yield self[i]

    def class_index(self, us, vs) -> np.ndarray:
        """Class index of each pair (vectorised, order-insensitive)."""
        sa = self.signature[np.asarray(us, dtype=np.int64)]
        sb = self.signature[np.asarray(vs, dtype=np.int64)]
        codes = np.minimum(sa, sb) * self._n_sig + np.maximum(sa, sb)
        return np.searchsorted(self._codes, codes)

    def class_of(self, u: int, v: int) -> ClassKey:
        if u == v:
            raise ValueError("a pair needs two distinct nodes")
        return self.key(int(self.class_index([u], [v])[0]))

    def as_dict(self) -> dict[ClassKey, ClassDecomposition]:
        return {c.key: c for c in self}


def partition_pairs(grouping: NodeGrouping) -> Partition:
    return Partition(grouping)


def format_key(key: ClassKey) -> str:
    return "|".join(".".join(str(x) for x in mu) for mu in key)
