"""Train/test splits: hide a fraction of edges and keep them as ground truth."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, write_edge_list


@dataclass(frozen=True, eq=False)
class SplitResult:
    train: Graph
    test_edges: np.ndarray
    removed_count: int
    removed_fraction: float
    mode: str
    seed: int | None = None

    def test_set(self) -> set[tuple[int, int]]:
        return set(map(tuple, self.test_edges.tolist()))

    def write_test_edges(self, path: str | Path) -> None:
        write_edge_list(self.train, path, self.test_edges)


def _check_fraction(fraction: float) -> None:
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")


def _finish(g: Graph, removed: np.ndarray, fraction: float, mode: str, seed) -> SplitResult:
    mask = np.ones(g.m, dtype=bool)
    mask[removed] = False
    train = g.subgraph_without(mask)
    test = g.edges[np.sort(removed)]
    # a test edge whose endpoint has no edge left in train cannot be predicted
    deg = train.degrees
    keep = (deg[test[:, 0]] > 0) & (deg[test[:, 1]] > 0)
    return SplitResult(
        train=train,
        test_edges=test[keep],
        removed_count=len(removed),
        removed_fraction=fraction,
        mode=mode,
        seed=seed,
    )


def random_split(g: Graph, fraction: float, seed: int) -> SplitResult:
    _check_fraction(fraction)
    count = int(np.floor(fraction * g.m))
    perm = np.random.default_rng(seed).permutation(g.m)
    return _finish(g, perm[:count], fraction, "random", seed)


def temporal_split(g: Graph, fraction: float) -> SplitResult:
    """Hold out the newest edges; equal timestamps fall back to pair order."""
    _check_fraction(fraction)
    if g.timestamps is None:
        raise ValueError("temporal split needs a timestamped graph")
    count = int(np.floor(fraction * g.m))
    order = np.lexsort((g.edges[:, 1], g.edges[:, 0], g.timestamps))
    return _finish(g, order[g.m - count:], fraction, "temporal", None)
