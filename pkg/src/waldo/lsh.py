"""Closest-pairs search between two node sets with random-hyperplane prefix trees.

Every level of a tree applies one random hyperplane to all of its leaves, so
a depth-``b`` tree is a ``b``-bit AND-hash and two vectors share a leaf with
probability ``(1 - angle / pi) ** b``. A tree keeps growing while the number
of same-leaf pairs (its volume) stays at or above the target, then the
search scores the union of same-leaf pairs over ``r`` independent trees.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .embeddings import EmbeddingMatrix

Seed = int | Sequence[int]
PairPredicate = Callable[[np.ndarray, np.ndarray], np.ndarray]


def default_b_max(pair_count: int) -> int:
    """Depth cap by class size: 12 / 15 / 20 / 30 at 1e9 / 1e10 / 2.5e10 pairs."""
    if pair_count < 1e9:
        return 12
    if pair_count < 1e10:
        return 15
    if pair_count < 2.5e10:
        return 20
    return 30


def default_trees(theta: int, pair_count: int) -> int:
    """Number of trees by the fraction of the class being retrieved."""
    frac = theta / max(pair_count, 1)
    if frac < 1e-4:
        return 5
    if frac < 1e-3:
        return 10
    return 25


def rng_for(seed: Seed, *stream: int) -> np.random.Generator:
    base = [int(seed)] if np.isscalar(seed) else [int(s) for s in seed]
    return np.random.default_rng(np.random.SeedSequence(base + [int(s) for s in stream]))


@dataclass(frozen=True)
class HyperplaneHash:
    """h(x) = 1 if w.x >= 0 else 0, with w a random Gaussian unit vector."""

    w: np.ndarray

    @classmethod
    def sample(cls, dims: int, rng: np.random.Generator) -> "HyperplaneHash":
        w = rng.standard_normal(dims)
        return cls(w / np.linalg.norm(w))

    def __call__(self, x) -> int:
        return hash_bit(self, x)


def hash_bit(h: HyperplaneHash, x) -> int:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape != h.w.shape:
        raise ValueError(f"vector has {x.size} dims, hyperplane has {h.w.size}")
    return int(float(h.w @ x) >= 0.0)


def bucket_volume(lcodes: np.ndarray, rcodes: np.ndarray | None) -> int:
    """Same-bucket pair count; ``rcodes=None`` means pairs within one set."""
    if rcodes is None:
        _, c = np.unique(lcodes, return_counts=True)
        return int((c * (c - 1) // 2).sum())
    lu, lc = np.unique(lcodes, return_counts=True)
    ru, rc = np.unique(rcodes, return_counts=True)
    _, il, ir = np.intersect1d(lu, ru, assume_unique=True, return_indices=True)
    return int((lc[il] * rc[ir]).sum())


@dataclass(eq=False)
class LshTree:
    left: np.ndarray
    right: np.ndarray
    diagonal: bool
    hyperplanes: list[HyperplaneHash]
    left_codes: np.ndarray
    right_codes: np.ndarray
    volume: int
    # the split that was drawn and undone because it fell below the target
    rejected: HyperplaneHash | None = None
    rejected_volume: int | None = None

    @property
    def depth(self) -> int:
        return len(self.hyperplanes)

    def buckets(self) -> dict[int, tuple[np.ndarray, np.ndarray]]:
        out = {}
        for code in np.unique(self.left_codes).tolist():
            lsub = self.left[self.left_codes == code]
            rsub = lsub if self.diagonal else self.right[self.right_codes == code]
            if len(rsub):
                out[code] = (lsub, rsub)
        return out

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Canonical same-bucket pairs (unordered, each once)."""
        lo = np.argsort(self.left_codes, kind="stable")
        if self.diagonal:
            return kernels.bucket_pairs(
                self.left_codes[lo], self.left[lo], self.left_codes[:0], self.left[:0],
                True, self.volume,
            )
        ro = np.argsort(self.right_codes, kind="stable")
        return kernels.bucket_pairs(
            self.left_codes[lo], self.left[lo], self.right_codes[ro], self.right[ro],
            False, self.volume,
        )


def _is_diagonal(left: np.ndarray, right: np.ndarray, diagonal: bool | None) -> bool:
    if diagonal is not None:
        return diagonal
    return left is right or (len(left) == len(right) and np.array_equal(left, right))


def _root_volume(nl: int, nr: int, diagonal: bool) -> int:
    return nl * (nl - 1) // 2 if diagonal else nl * nr


@dataclass
class _Side:
    nodes: np.ndarray
    data: object = field(repr=False)

    def bits(self, w: np.ndarray) -> np.ndarray:
        return (np.asarray(self.data @ w).ravel() >= 0.0).astype(np.int64)


def _grow(left: _Side, right: _Side | None, dims: int, theta: int, b_max: int,
          rng: np.random.Generator) -> LshTree:
    diagonal = right is None
    lcodes = np.zeros(len(left.nodes), dtype=np.int64)
    rcodes = None if diagonal else np.zeros(len(right.nodes), dtype=np.int64)
    volume = _root_volume(len(left.nodes), 0 if diagonal else len(right.nodes), diagonal)
    planes: list[HyperplaneHash] = []
    rejected = rejected_volume = None
    while volume > theta and len(planes) < b_max:
        h = HyperplaneHash.sample(dims, rng)
        new_l = (lcodes << 1) | left.bits(h.w)
        new_r = None if diagonal else (rcodes << 1) | right.bits(h.w)
        new_volume = bucket_volume(new_l, new_r)
        if new_volume < theta:
            rejected, rejected_volume = h, new_volume
            break
        lcodes, rcodes, volume = new_l, new_r, new_volume
        planes.append(h)
    return LshTree(
        left=left.nodes,
        right=left.nodes if diagonal else right.nodes,
        diagonal=diagonal,
        hyperplanes=planes,
        left_codes=lcodes,
        right_codes=lcodes if diagonal else rcodes,
        volume=volume,
        rejected=rejected,
        rejected_volume=rejected_volume,
    )


def _sides(left, right, x: EmbeddingMatrix, diagonal: bool):
    """Row blocks for both sides, plus the number of coordinates hyperplanes need.

    Sparse reductions have one column per node; only columns that are nonzero
    somewhere in the class can affect a sign, so the rest are dropped and
    hyperplanes are drawn in that smaller subspace.
    """
    left = np.asarray(left, dtype=np.int64)
    right = left if diagonal else np.asarray(right, dtype=np.int64)
    ldata = x.data[left]
    rdata = None if diagonal else x.data[right]
    if x.is_sparse:
        support = np.unique(np.concatenate([ldata.indices, [] if diagonal else rdata.indices]))
        support = support.astype(np.int64) if len(support) else np.zeros(1, dtype=np.int64)
        ldata = ldata[:, support]
        rdata = None if diagonal else rdata[:, support]
        dims = max(len(support), 1)
    else:
        dims = x.dims
    lside = _Side(left, ldata)
    return lside, (None if diagonal else _Side(right, rdata)), dims


def build_tree(left, right, x: EmbeddingMatrix, theta: int, b_max: int, seed: Seed = 0,
               diagonal: bool | None = None) -> LshTree:
    """Deepest prefix tree (depth <= ``b_max``) whose bucket volume stays >= ``theta``."""
    if theta < 1:
        raise ValueError("theta must be >= 1")
    diagonal = _is_diagonal(np.asarray(left), np.asarray(right), diagonal)
    lside, rside, dims = _sides(left, right, x, diagonal)
    return _grow(lside, rside, dims, theta, b_max, rng_for(seed))


@dataclass(eq=False)
class ClosestPairs:
    """Ranked unlinked pairs plus what the search saw on the way."""

    pairs: np.ndarray
    scores: np.ndarray
    shortfall: int
    candidates: int
    excluded_pairs: np.ndarray
    excluded_scores: np.ndarray
    depths: list[int]


def rank(us: np.ndarray, vs: np.ndarray, scores: np.ndarray, top: int | None = None) -> np.ndarray:
    """Order by score descending, then canonical pair; only the first ``top`` if given."""
    if top is None or top >= len(scores):
        return np.lexsort((vs, us, -scores))
    if top <= 0:
        return np.empty(0, dtype=np.int64)
    cut = np.partition(scores, len(scores) - top)[len(scores) - top]
    keep = np.flatnonzero(scores >= cut)
    return keep[np.lexsort((vs[keep], us[keep], -scores[keep]))][:top]


def closest_pairs(
    left,
    right,
    x: EmbeddingMatrix,
    theta: int,
    r: int,
    b_max: int,
    seed: Seed = 0,
    exclude: PairPredicate | None = None,
    score: PairPredicate | None = None,
    diagonal: bool | None = None,
) -> ClosestPairs:
    """Top-``theta`` pairs of ``left x right`` by exact score over the LSH candidate union.

    ``exclude(us, vs)`` flags pairs to drop (observed edges); those that were
    bucketed are returned separately with their scores. If fewer than
    ``theta`` pairs survive, all are returned and ``shortfall`` says how many
    are missing.
    """
    if theta < 1 or r < 1:
        raise ValueError("theta and r must be >= 1")
    diagonal = _is_diagonal(np.asarray(left), np.asarray(right), diagonal)
    lside, rside, dims = _sides(left, right, x, diagonal)
    n = x.rows
    keys = []
    depths = []
    for t in range(r):
        tree = _grow(lside, rside, dims, theta, b_max, rng_for(seed, t))
        depths.append(tree.depth)
        us, vs = tree.pairs()
        keys.append(us * n + vs)
    keys = np.unique(np.concatenate(keys)) if keys else np.empty(0, np.int64)
    us, vs = keys // n, keys % n
    scorer = score if score is not None else x.dot_pairs
    drop = exclude(us, vs) if exclude is not None else np.zeros(len(us), dtype=bool)
    ex_u, ex_v = us[drop], vs[drop]
    ex_scores = scorer(ex_u, ex_v) if len(ex_u) else np.zeros(0)
    us, vs = us[~drop], vs[~drop]
    s = scorer(us, vs) if len(us) else np.zeros(0)
    order = rank(us, vs, s, theta)
    return ClosestPairs(
        pairs=np.stack([us[order], vs[order]], axis=1),
        scores=s[order],
        shortfall=max(0, theta - len(order)),
        candidates=len(keys),
        excluded_pairs=np.stack([ex_u, ex_v], axis=1),
        excluded_scores=np.asarray(ex_scores, dtype=np.float64),
        depths=depths,
    )
