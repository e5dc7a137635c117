"""Per-class budget allocation from observed-edge counts, plus drift diagnostics.

The number of the ``k`` new links landing in a class is binomial with success
probability ``p = observed / m``; the roadmap keeps its mean and standard
deviation and turns them into a direct quota (mean - std) and a pool quota
(up to mean + std).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, NamedTuple

import numpy as np

from .graph import Graph
from .grouping import Partition, format_key

NORM_TOL = 1e-9


def round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5).astype(np.int64)


@dataclass(frozen=True, eq=False)
class Roadmap:
    partition: Partition
    k: int
    m: int
    observed: np.ndarray
    resemblance: np.ndarray
    expected: np.ndarray
    std: np.ndarray
    direct_target: np.ndarray
    pool_target: np.ndarray

    @property
    def theta(self) -> np.ndarray:
        """Pairs to find per class: round(mean + std)."""
        return self.direct_target + self.pool_target

    def __len__(self) -> int:
        return len(self.observed)

    def rows(self):
        for i in range(len(self)):
            yield (
                format_key(self.partition.key(i)),
                int(self.observed[i]),
                float(self.resemblance[i]),
                float(self.expected[i]),
                float(self.std[i]),
                int(self.direct_target[i]),
                int(self.pool_target[i]),
            )

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["class_key", "observed", "resemblance", "expected",
                        "std", "direct_target", "pool_target"])
            for row in self.rows():
                w.writerow([row[0], row[1], repr(row[2]), repr(row[3]), repr(row[4]),
                            row[5], row[6]])


def class_counts(partition: Partition, edges: np.ndarray) -> np.ndarray:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    idx = partition.class_index(edges[:, 0], edges[:, 1])
    return np.bincount(idx, minlength=len(partition)).astype(np.int64)


def class_distribution(partition: Partition, edges: np.ndarray) -> np.ndarray:
    counts = class_counts(partition, edges)
    if counts.sum() == 0:
        raise ValueError("no edges to form a distribution")
    return counts / counts.sum()


def build_roadmap(partition: Partition, train: Graph, k: int) -> Roadmap:
    if k < 1:
        raise ValueError("k must be >= 1")
    m = train.m
    if m == 0:
        raise ValueError("training graph has no edges")
    observed = class_counts(partition, train.edges)
    p = observed / m
    expected = k * p
    std = np.sqrt(k * observed * (m - observed) / m**2)
    upper = round_half_up(expected + std)
    direct = np.maximum(round_half_up(expected - std), 0)
    excess = int(direct.sum()) - k
    if excess > 0:
        # rounding pushed the direct quotas past k: demote the largest round-ups
        residual = np.where(direct > 0, direct - (expected - std), -np.inf)
        demote = np.argsort(-residual, kind="stable")[:excess]
        direct[demote] -= 1
    return Roadmap(
        partition=partition, k=k, m=m, observed=observed, resemblance=p,
        expected=expected, std=std, direct_target=direct, pool_target=upper - direct,
    )


def _aligned(p, q) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(p, Mapping) or isinstance(q, Mapping):
        p = dict(p)
        q = dict(q)
        keys = sorted(set(p) | set(q), key=repr)
        pa = np.array([p.get(x, 0.0) for x in keys], dtype=np.float64)
        qa = np.array([q.get(x, 0.0) for x in keys], dtype=np.float64)
    else:
        pa = np.asarray(p, dtype=np.float64)
        qa = np.asarray(q, dtype=np.float64)
        if pa.shape != qa.shape:
            raise ValueError("distributions cover different class sets")
    for name, d in (("p", pa), ("q", qa)):
        if (d < 0).any() or abs(d.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"{name} is not a probability distribution (sum={d.sum()!r})")
    return pa, qa


def tv_distance(p, q) -> float:
    """Total variation distance, as half the L1 distance."""
    pa, qa = _aligned(p, q)
    return 0.5 * float(np.abs(pa - qa).sum())


def kl_divergence(p, q) -> float | None:
    """D_KL(p || q); None unless both distributions are strictly positive."""
    pa, qa = _aligned(p, q)
    if (pa <= 0).any() or (qa <= 0).any():
        return None
    return float(np.sum(pa * np.log(pa / qa)))


def total_error(k: int, p_new, p_obs) -> float:
    """Σ |k p_obs(C) - k p_new(C)| evaluated term by term."""
    pa, qa = _aligned(p_new, p_obs)
    return float(sum(abs(k * b - k * a) for a, b in zip(pa.tolist(), qa.tolist())))


class ErrorBound(NamedTuple):
    xi: float
    cap: float
    pinsker: float | None = None


def total_error_bound(k: int, dtv: float, kl: float | None = None) -> ErrorBound:
    """Total allocation error 2k·d_TV, the 2k cap, and the Pinsker bound if ``kl`` is known."""
    if not 0.0 <= dtv <= 1.0 + NORM_TOL:
        raise ValueError("dtv must lie in [0, 1]")
    pinsker = None if kl is None else 2 * k * math.sqrt(0.5 * kl)
    return ErrorBound(xi=2 * k * dtv, cap=2.0 * k, pinsker=pinsker)
