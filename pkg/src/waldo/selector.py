"""Roadmap-guided candidate selection.

Each equivalence class is searched for its ``round(mean + std)`` best unlinked
pairs (exhaustively below ``tau`` pairs, by LSH above). The first
``round(mean - std)`` go straight into the candidate set and the rest into a
global pool, which later tops the set up to ``k`` in score order. Classes
where the proximity misses too many observed edges are abandoned and their
quota is refilled from the Adamic/Adar ranking.
"""
from __future__ import annotations

import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import heuristics
from .embeddings import ProximityModel
from .graph import Graph, WaldoWarning
from .grouping import ClassDecomposition, ClassKey, NodeGrouping, Partition, partition_pairs
from .lsh import closest_pairs, default_b_max, default_trees, rank
from .roadmap import Roadmap, build_roadmap

log = logging.getLogger(__name__)

DEFAULT_TAU = 25_000_000
DEFAULT_ZETA = 0.5
SOURCES = ("direct", "pool", "replacement")

_EMPTY_PAIRS = np.empty((0, 2), dtype=np.int64)
# score-matrix entries per block in exhaustive dense search
_BLOCK = 1 << 22


@dataclass(eq=False)
class ClassSelection:
    """Search result for one class: ranked direct and pool pairs, bailout stats."""

    direct: np.ndarray
    direct_scores: np.ndarray
    pool: np.ndarray
    pool_scores: np.ndarray
    observed: int
    encountered: int
    shortfall: int = 0
    mode: str = "exact"

    @classmethod
    def empty(cls, observed: int = 0, mode: str = "exact") -> "ClassSelection":
        return cls(_EMPTY_PAIRS, np.zeros(0), _EMPTY_PAIRS, np.zeros(0),
                   observed=observed, encountered=observed, mode=mode)


@dataclass(eq=False)
class CandidateSet:
    pairs: np.ndarray
    scores: np.ndarray
    sources: np.ndarray
    k: int
    bailed_classes: list[ClassKey] = field(default_factory=list)
    replacement_count: int = 0
    roadmap: Roadmap | None = None
    selections: dict[int, ClassSelection] = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.pairs)

    def count(self, source: str) -> int:
        return int((self.sources == source).sum())

    def pair_keys(self, n: int) -> np.ndarray:
        return self.pairs[:, 0] * n + self.pairs[:, 1]

    def write(self, path: str | Path, g: Graph) -> None:
        """``u_label v_label score source`` lines, best score first."""
        order = np.lexsort((self.pairs[:, 1], self.pairs[:, 0], -self.scores))
        with open(path, "w", encoding="utf-8") as fh:
            for i in order.tolist():
                u, v = self.pairs[i]
                fh.write(f"{g.label(u)} {g.label(v)} {float(self.scores[i])!r} {self.sources[i]}\n")


def _class_mask(cls: ClassDecomposition, n: int) -> tuple[np.ndarray, np.ndarray]:
    in_left = np.zeros(n, dtype=bool)
    in_left[cls.left] = True
    in_right = np.zeros(n, dtype=bool)
    in_right[cls.right] = True
    return in_left, in_right


def _in_class(cls: ClassDecomposition, n: int, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    in_left, in_right = _class_mask(cls, n)
    return (in_left[us] & in_right[vs]) | (in_right[us] & in_left[vs])


def class_edges(cls: ClassDecomposition, train: Graph) -> np.ndarray:
    e = train.edges
    return e[_in_class(cls, train.n, e[:, 0], e[:, 1])]


def _split(us, vs, s, direct_target: int, pool_target: int):
    pairs = np.stack([us, vs], axis=1).astype(np.int64).reshape(-1, 2)
    s = np.asarray(s, dtype=np.float64)
    d = min(direct_target, len(pairs))
    p = min(direct_target + pool_target, len(pairs))
    return pairs[:d], s[:d], pairs[d:p], s[d:p]


def _encounters(observed_scores: np.ndarray, ranked_scores: np.ndarray, theta: int) -> int:
    """Observed edges scoring at least the theta-th best unlinked pair."""
    if len(ranked_scores) < theta:
        return len(observed_scores)
    return int((observed_scores >= ranked_scores[theta - 1]).sum())


def _ranked_two_hop_in_class(cls, proximity: ProximityModel):
    us, vs, s = heuristics.rank_two_hop(proximity.graph, proximity.kind)
    keep = _in_class(cls, proximity.graph.n, us, vs)
    return us[keep], vs[keep], s[keep]


def _zero_fill(cls: ClassDecomposition, train: Graph, skip_keys: np.ndarray, need: int):
    """First ``need`` unlinked class pairs in canonical order, skipping ``skip_keys``."""
    skip_keys = np.sort(skip_keys)
    got = []
    total = 0
    for block in cls.iter_canonical():
        keep = ~train.has_edges(block[:, 0], block[:, 1])
        if len(skip_keys):
            keep &= ~np.isin(block[:, 0] * train.n + block[:, 1], skip_keys)
        block = block[keep]
        got.append(block[: need - total])
        total += len(got[-1])
        if total >= need:
            break
    return np.concatenate(got) if got else _EMPTY_PAIRS


def _heuristic_class(cls, proximity, theta, candidates):
    """Exact top-theta for CN/JS/AA: ranked 2-hop pairs, then zero-score pairs."""
    train = proximity.graph
    if candidates is None:
        candidates = _ranked_two_hop_in_class(cls, proximity)
    us, vs, s = (np.asarray(a) for a in candidates)
    us, vs, s = us[:theta], vs[:theta], s[:theta]
    if len(us) < theta:
        skip = np.asarray(candidates[0]) * train.n + np.asarray(candidates[1])
        extra = _zero_fill(cls, train, skip, theta - len(us))
        us = np.concatenate([us, extra[:, 0]])
        vs = np.concatenate([vs, extra[:, 1]])
        s = np.concatenate([s, np.zeros(len(extra))])
    return us.astype(np.int64), vs.astype(np.int64), s.astype(np.float64)


def _dense_class(cls, proximity, theta, observed_edges):
    """Exhaustive top-theta by dot product, in row blocks."""
    x = np.asarray(proximity.embeddings.data)
    n = proximity.graph.n
    left, right = cls.left, cls.right
    col_of = np.full(n, -1, dtype=np.int64)
    col_of[right] = np.arange(len(right))
    # observed edges oriented (row node in left, column node in right)
    eu, ev = observed_edges[:, 0], observed_edges[:, 1]
    in_left = np.zeros(n, dtype=bool)
    in_left[left] = True
    rows_e = np.concatenate([eu[in_left[eu] & (col_of[ev] >= 0)], ev[in_left[ev] & (col_of[eu] >= 0)]])
    cols_e = np.concatenate([ev[in_left[eu] & (col_of[ev] >= 0)], eu[in_left[ev] & (col_of[eu] >= 0)]])
    xr = x[right]
    best_u = best_v = np.empty(0, dtype=np.int64)
    best_s = np.empty(0)
    step = max(1, _BLOCK // max(len(right), 1))
    for a in range(0, len(left), step):
        rows = left[a:a + step]
        scores = x[rows] @ xr.T
        valid = np.ones(scores.shape, dtype=bool)
        if cls.diagonal:
            valid &= rows[:, None] < right[None, :]
        row_of = np.full(n, -1, dtype=np.int64)
        row_of[rows] = np.arange(len(rows))
        hit = row_of[rows_e] >= 0
        valid[row_of[rows_e[hit]], col_of[cols_e[hit]]] = False
        ri, ci = np.nonzero(valid)
        s = scores[ri, ci]
        u, v = rows[ri], right[ci]
        u, v = np.minimum(u, v), np.maximum(u, v)
        u = np.concatenate([best_u, u])
        v = np.concatenate([best_v, v])
        s = np.concatenate([best_s, s])
        order = rank(u, v, s, theta)
        best_u, best_v, best_s = u[order], v[order], s[order]
    return best_u, best_v, best_s


def select_pairs_exact(
    cls: ClassDecomposition,
    proximity: ProximityModel,
    direct_target: int,
    pool_target: int,
    candidates=None,
    observed_edges: np.ndarray | None = None,
) -> ClassSelection:
    """Score every unlinked pair of the class and keep the best ``direct + pool``.

    ``candidates`` optionally supplies the class's ranked 2-hop pairs for
    heuristic proximities (the orchestrator computes them once globally).
    """
    train = proximity.graph
    if observed_edges is None:
        observed_edges = class_edges(cls, train)
    theta = direct_target + pool_target
    if theta == 0:
        return ClassSelection.empty(len(observed_edges))
    if proximity.is_heuristic:
        us, vs, s = _heuristic_class(cls, proximity, theta, candidates)
    else:
        us, vs, s = _dense_class(cls, proximity, theta, observed_edges)
    obs_scores = proximity.score_pairs(observed_edges[:, 0], observed_edges[:, 1])
    d, ds, p, ps = _split(us, vs, s, direct_target, pool_target)
    return ClassSelection(
        d, ds, p, ps,
        observed=len(observed_edges),
        encountered=_encounters(obs_scores, s, theta),
        shortfall=max(0, theta - len(us)),
        mode="exact",
    )


def select_pairs_approx(
    cls: ClassDecomposition,
    proximity: ProximityModel,
    direct_target: int,
    pool_target: int,
    b_max: int | None = None,
    r: int | None = None,
    seed=0,
    candidates=None,
    observed_edges: np.ndarray | None = None,
) -> ClassSelection:
    """Like :func:`select_pairs_exact` but over the LSH candidate union.

    Jaccard has no vector form, so it is searched over the class's 2-hop pairs.
    """
    train = proximity.graph
    if observed_edges is None:
        observed_edges = class_edges(cls, train)
    theta = direct_target + pool_target
    if theta == 0:
        return ClassSelection.empty(len(observed_edges), mode="approx")
    if proximity.kind == "JS":
        sel = select_pairs_exact(cls, proximity, direct_target, pool_target,
                                 candidates=candidates, observed_edges=observed_edges)
        sel.mode = "two-hop"
        return sel
    b_max = default_b_max(cls.pair_count) if b_max is None else b_max
    r = default_trees(theta, cls.pair_count) if r is None else r
    found = closest_pairs(
        cls.left, cls.right, proximity.vectors, theta, r, b_max, seed,
        exclude=train.has_edges, score=proximity.score_pairs, diagonal=cls.diagonal,
    )
    d, ds, p, ps = _split(found.pairs[:, 0], found.pairs[:, 1], found.scores,
                          direct_target, pool_target)
    return ClassSelection(
        d, ds, p, ps,
        observed=len(observed_edges),
        encountered=_encounters(found.excluded_scores, found.scores, theta),
        shortfall=found.shortfall,
        mode="approx",
    )


def check_bailout(stats: ClassSelection, zeta: float) -> bool:
    """Bail when fewer than ``zeta`` of the class's observed edges were encountered."""
    if not 0.0 <= zeta <= 1.0:
        raise ValueError("zeta must lie in [0, 1]")
    if stats.observed == 0:
        return False
    return stats.encountered / stats.observed < zeta


def worker_count() -> int:
    env = os.environ.get("WALDO_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def _keys(pairs: np.ndarray, n: int) -> np.ndarray:
    return pairs[:, 0] * n + pairs[:, 1]


def _global_zero_fill(train: Graph, taken: np.ndarray, need: int) -> np.ndarray:
    """Unlinked pairs not in ``taken`` (sorted keys), in canonical order."""
    n = train.n
    out = []
    total = 0
    for u in range(n - 1):
        vs = np.arange(u + 1, n, dtype=np.int64)
        us = np.full(len(vs), u, dtype=np.int64)
        keep = ~train.has_edges(us, vs) & ~np.isin(us * n + vs, taken)
        vs = vs[keep][: need - total]
        if len(vs):
            out.append(np.stack([np.full(len(vs), u, dtype=np.int64), vs], axis=1))
            total += len(vs)
        if total >= need:
            break
    return np.concatenate(out) if out else _EMPTY_PAIRS


class _Builder:
    """Accumulates the candidate set while keeping pairs unique."""

    def __init__(self, n: int):
        self.n = n
        self.pairs: list[np.ndarray] = []
        self.scores: list[np.ndarray] = []
        self.sources: list[np.ndarray] = []
        self.size = 0
        self._taken = np.empty(0, dtype=np.int64)

    def taken(self) -> np.ndarray:
        return self._taken

    def add(self, pairs: np.ndarray, scores: np.ndarray, source: str, limit: int) -> int:
        """Append unseen pairs in order until ``size == limit``; returns the count added."""
        room = limit - self.size
        if room <= 0 or len(pairs) == 0:
            return 0
        keys = _keys(pairs, self.n)
        fresh = ~np.isin(keys, self._taken)
        # the same pair can repeat inside one batch only for the AA ranking, which is unique
        pairs, scores, keys = pairs[fresh][:room], scores[fresh][:room], keys[fresh][:room]
        if len(pairs) == 0:
            return 0
        self.pairs.append(pairs)
        self.scores.append(scores)
        self.sources.append(np.full(len(pairs), source, dtype=object))
        self._taken = np.union1d(self._taken, keys)
        self.size += len(pairs)
        return len(pairs)


def run_linkwaldo(
    train: Graph,
    grouping: NodeGrouping | Partition,
    proximity: ProximityModel,
    k: int,
    tau: int = DEFAULT_TAU,
    zeta: float = DEFAULT_ZETA,
    b_max: int | None = None,
    r: int | None = None,
    seed=0,
    workers: int | None = None,
) -> CandidateSet:
    """Select ``k`` candidate pairs from ``train`` following the class roadmap."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if proximity.graph is not train:
        raise ValueError("proximity model must be built on the training graph")
    n = train.n
    partition = grouping if isinstance(grouping, Partition) else partition_pairs(grouping)
    available = n * (n - 1) // 2 - train.m
    if k > available:
        warnings.warn(f"k={k} exceeds the {available} unlinked pairs; returning all of them",
                      WaldoWarning, stacklevel=2)
        k = available
    if k == 0:
        return CandidateSet(_EMPTY_PAIRS, np.zeros(0), np.empty(0, dtype=object), 0)
    roadmap = build_roadmap(partition, train, k)

    edge_class = partition.class_index(train.edges[:, 0], train.edges[:, 1])
    edge_order = np.argsort(edge_class, kind="stable")
    edge_bounds = np.searchsorted(edge_class[edge_order], np.arange(len(partition) + 1))

    ranked = None
    cand_bounds = None
    if proximity.is_heuristic:
        ranked = heuristics.rank_two_hop(train, proximity.kind)
        cid = partition.class_index(ranked[0], ranked[1])
        order = np.argsort(cid, kind="stable")
        ranked_by_class = tuple(a[order] for a in ranked)
        cand_bounds = np.searchsorted(cid[order], np.arange(len(partition) + 1))

    active = np.flatnonzero(roadmap.theta > 0)

    def search(ci: int) -> ClassSelection:
        cls = partition[ci]
        obs = train.edges[edge_order[edge_bounds[ci]:edge_bounds[ci + 1]]]
        cands = None
        if ranked is not None:
            lo, hi = cand_bounds[ci], cand_bounds[ci + 1]
            cands = tuple(a[lo:hi] for a in ranked_by_class)
        d, p = int(roadmap.direct_target[ci]), int(roadmap.pool_target[ci])
        if cls.pair_count < tau:
            return select_pairs_exact(cls, proximity, d, p, candidates=cands, observed_edges=obs)
        return select_pairs_approx(cls, proximity, d, p, b_max=b_max, r=r, seed=(seed, ci),
                                   candidates=cands, observed_edges=obs)

    workers = worker_count() if workers is None else max(1, workers)
    if workers > 1 and len(active) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(search, active.tolist()))
    else:
        results = [search(ci) for ci in active.tolist()]
    selections = dict(zip(active.tolist(), results))

    bailed: list[int] = []
    quota = 0
    for ci, sel in selections.items():
        if check_bailout(sel, zeta):
            bailed.append(ci)
            quota += int(roadmap.theta[ci])
    log.debug("%d active classes, %d bailed, replacement quota %d",
              len(active), len(bailed), quota)

    out = _Builder(n)
    bailed_set = set(bailed)
    kept = [ci for ci in selections if ci not in bailed_set]
    if kept:
        out.add(np.concatenate([selections[ci].direct for ci in kept]),
                np.concatenate([selections[ci].direct_scores for ci in kept]), "direct", k)

    pool_pairs = [selections[ci].pool for ci in kept]
    pool_scores = [selections[ci].pool_scores for ci in kept]
    pool_class = [np.full(len(selections[ci].pool), ci) for ci in kept]
    if pool_pairs:
        pp = np.concatenate(pool_pairs)
        ps = np.concatenate(pool_scores)
        pc = np.concatenate(pool_class)
        order = np.lexsort((pp[:, 1], pp[:, 0], pc, -ps))
        pp, ps = pp[order], ps[order]
    else:
        pp, ps = _EMPTY_PAIRS, np.zeros(0)
    used = out.add(pp, ps, "pool", max(out.size, k - quota))
    pp, ps = pp[used:], ps[used:]

    replaced = 0
    if out.size < k:
        if proximity.kind == "AA":
            aa = ranked
        else:
            aa = heuristics.rank_two_hop(train, "AA")
        aa_pairs = np.stack([aa[0], aa[1]], axis=1).astype(np.int64)
        replaced += out.add(aa_pairs, aa[2], "replacement", k)
    if out.size < k:
        out.add(pp, ps, "pool", k)
    if out.size < k:
        extra = _global_zero_fill(train, out.taken(), k - out.size)
        replaced += out.add(extra, np.zeros(len(extra)), "replacement", k)

    pairs = np.concatenate(out.pairs) if out.pairs else _EMPTY_PAIRS
    scores = np.concatenate(out.scores) if out.scores else np.zeros(0)
    sources = np.concatenate(out.sources) if out.sources else np.empty(0, dtype=object)
    return CandidateSet(
        pairs=pairs,
        scores=scores,
        sources=sources,
        k=k,
        bailed_classes=[partition.key(ci) for ci in bailed],
        replacement_count=replaced,
        roadmap=roadmap,
        selections=selections,
    )
