"""Split -> select -> score loop over seeds, with JSON/CSV reporting."""
from __future__ import annotations

import dataclasses
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import heuristics
from .embeddings import EmbeddingMatrix, ProximityModel, load_embeddings
from .graph import Graph, load_edge_list
from .grouping import (
    NodeGrouping,
    Partition,
    cluster_embeddings,
    combine,
    degree_log_bins,
    format_key,
    partition_pairs,
)
from .metrics import hits as count_hits
from .roadmap import class_counts, kl_divergence, total_error_bound, tv_distance
from .selector import DEFAULT_TAU, DEFAULT_ZETA, CandidateSet, run_linkwaldo
from .split import SplitResult, random_split, temporal_split

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
METHODS = ("linkwaldo", "aa", "cn", "js", "lapm")
GROUPINGS = ("dg", "sg", "cg", "mg")
PROXIMITIES = ("aa", "cn", "js", "emb")
SPLITS = ("random", "temporal")
LAPM_TREES = 25


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    graph: str
    method: str = "linkwaldo"
    k: int = 10_000
    grouping: str = "dg"
    bins: int = 25
    sg_clusters: int = 5
    cg_clusters: int = 5
    proximity: str = "aa"
    emb_file: str | None = None
    struct_emb_file: str | None = None
    tau: int = DEFAULT_TAU
    zeta: float = DEFAULT_ZETA
    split: str = "random"
    fraction: float = 0.2
    seeds: int = 5
    seed: int = 0
    out: str | None = None
    bipartite: bool = False

    def validate(self) -> None:
        for name, value, allowed in (
            ("method", self.method, METHODS),
            ("grouping", self.grouping, GROUPINGS),
            ("proximity", self.proximity, PROXIMITIES),
            ("split", self.split, SPLITS),
        ):
            if value not in allowed:
                raise ConfigError(f"{name} must be one of {', '.join(allowed)}; got {value!r}")
        if self.k < 1 or self.seeds < 1 or self.bins < 1 or self.tau < 1:
            raise ConfigError("k, seeds, bins and tau must be positive")
        if self.sg_clusters < 1 or self.cg_clusters < 1:
            raise ConfigError("cluster counts must be positive")
        if not 0.0 <= self.zeta <= 1.0:
            raise ConfigError("zeta must lie in [0, 1]")
        if not 0.0 < self.fraction < 1.0:
            raise ConfigError("fraction must lie in (0, 1)")
        if not Path(self.graph).is_file():
            raise ConfigError(f"graph file not found: {self.graph}")
        needs = set()
        if self.method in ("linkwaldo", "lapm") and self.proximity == "emb":
            needs.add("emb_file")
        if self.method == "linkwaldo":
            if self.grouping in ("sg", "mg"):
                needs.add("struct_emb_file")
            if self.grouping in ("cg", "mg"):
                needs.add("emb_file")
        for attr in sorted(needs):
            path = getattr(self, attr)
            flag = "--" + attr.replace("_", "-")
            if path is None:
                raise ConfigError(
                    f"{flag} is required for method={self.method} grouping={self.grouping} "
                    f"proximity={self.proximity}"
                )
            if not Path(path).is_file():
                raise ConfigError(f"{flag} not found: {path}")

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def build_grouping(cfg: ExperimentConfig, train: Graph, embeddings: dict, seed: int) -> NodeGrouping:
    parts = []
    if cfg.grouping in ("dg", "mg"):
        parts.append(degree_log_bins(train, cfg.bins))
    if cfg.grouping in ("sg", "mg"):
        parts.append(cluster_embeddings(embeddings["struct"], cfg.sg_clusters, seed, "SG"))
    if cfg.grouping in ("cg", "mg"):
        parts.append(cluster_embeddings(embeddings["emb"], cfg.cg_clusters, seed, "CG"))
    return combine(parts)


def build_proximity(cfg: ExperimentConfig, train: Graph, embeddings: dict) -> ProximityModel:
    if cfg.proximity == "emb":
        return ProximityModel("emb", train, embeddings["emb"])
    return ProximityModel(cfg.proximity.upper(), train)


def single_group(n: int) -> NodeGrouping:
    return NodeGrouping(np.zeros(n, dtype=np.int64), "single")


def run_method(cfg: ExperimentConfig, train: Graph, embeddings: dict, seed: int):
    """Returns ``(candidate pairs, CandidateSet | None, Partition | None)``."""
    if cfg.method in ("aa", "cn", "js"):
        us, vs, _ = heuristics.top_k_heuristic(train, cfg.method, cfg.k)
        return np.stack([us, vs], axis=1), None, None
    proximity = build_proximity(cfg, train, embeddings)
    if cfg.method == "lapm":
        partition = partition_pairs(single_group(train.n))
        cands = run_linkwaldo(train, partition, proximity, cfg.k, tau=cfg.tau, zeta=0.0,
                              r=LAPM_TREES, seed=seed)
    else:
        partition = partition_pairs(build_grouping(cfg, train, embeddings, seed))
        cands = run_linkwaldo(train, partition, proximity, cfg.k, tau=cfg.tau, zeta=cfg.zeta,
                              seed=seed)
    return cands.pairs, cands, partition


def tv_diagnostic(partition: Partition, split: SplitResult, k: int) -> dict | None:
    """Class-distribution drift between held-out and training edges."""
    if len(split.test_edges) == 0 or split.train.m == 0:
        return None
    p_obs = class_counts(partition, split.train.edges) / split.train.m
    p_new = class_counts(partition, split.test_edges) / len(split.test_edges)
    dtv = tv_distance(p_new, p_obs)
    bound = total_error_bound(k, dtv, kl_divergence(p_new, p_obs))
    return {"dtv": dtv, "xi": bound.xi, "cap": bound.cap, "pinsker": bound.pinsker}


def per_class_hits(partition: Partition, pairs: np.ndarray, test: np.ndarray, n: int) -> dict:
    if len(pairs) == 0 or len(test) == 0:
        return {}
    keys = pairs[:, 0] * n + pairs[:, 1]
    hit = test[np.isin(test[:, 0] * n + test[:, 1], keys)]
    idx = partition.class_index(hit[:, 0], hit[:, 1])
    counts = np.bincount(idx, minlength=len(partition))
    return {format_key(partition.key(i)): int(c) for i, c in enumerate(counts) if c}


def _load_embeddings(cfg: ExperimentConfig, g: Graph) -> dict[str, EmbeddingMatrix]:
    out = {}
    if cfg.emb_file is not None:
        out["emb"] = load_embeddings(cfg.emb_file, g)
    if cfg.struct_emb_file is not None:
        out["struct"] = load_embeddings(cfg.struct_emb_file, g)
    return out


def _std(values: list[float]) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def run_seed(cfg: ExperimentConfig, g: Graph, embeddings: dict, seed: int,
             out: Path | None = None) -> dict:
    if cfg.split == "random":
        split = random_split(g, cfg.fraction, seed)
    else:
        split = temporal_split(g, cfg.fraction)
    train = split.train
    t0 = time.perf_counter()
    pairs, cands, partition = run_method(cfg, train, embeddings, seed)
    runtime = time.perf_counter() - t0
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    test = split.test_edges
    h = count_hits(pairs, test, g.n)
    diag_partition = partition
    if diag_partition is None:
        diag_partition = partition_pairs(degree_log_bins(train, cfg.bins))
    record = {
        "seed": seed,
        "recall_at_k": h / len(test) if len(test) else None,
        "precision_at_k": h / len(pairs) if len(pairs) else None,
        "hits": h,
        "test_size": int(len(test)),
        "removed": split.removed_count,
        "candidates": int(len(pairs)),
        "runtime_seconds": runtime,
        "classes": len(diag_partition),
        "single_class": len(diag_partition) == 1,
        "tv_diagnostic": tv_diagnostic(diag_partition, split, cfg.k),
        "per_class_hits": per_class_hits(diag_partition, pairs, test, g.n),
    }
    if cands is not None:
        record["bailed_classes"] = [format_key(key) for key in cands.bailed_classes]
        record["replacement_count"] = cands.replacement_count
        record["sources"] = {s: cands.count(s) for s in ("direct", "pool", "replacement")}
    if out is not None:
        if cands is None:
            scores = heuristics.score_pairs(train, cfg.method, pairs[:, 0], pairs[:, 1])
            cands = CandidateSet(pairs, scores, np.full(len(pairs), "direct", dtype=object),
                                 cfg.k)
        cands.write(out / f"candidates_seed{seed}.txt", g)
        if cands.roadmap is not None:
            cands.roadmap.write_csv(out / f"roadmap_seed{seed}.csv")
    return record


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run every seed; write ``report.json`` (and per-seed files) when ``cfg.out`` is set."""
    cfg.validate()
    g = load_edge_list(cfg.graph, weighted_timestamps=cfg.split == "temporal",
                       bipartite=cfg.bipartite)
    embeddings = _load_embeddings(cfg, g)
    out = Path(cfg.out) if cfg.out is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    records = []
    for seed in range(cfg.seed, cfg.seed + cfg.seeds):
        rec = run_seed(cfg, g, embeddings, seed, out)
        log.info("seed %d: R@k=%s P@k=%s (%.2fs)", seed, rec["recall_at_k"],
                 rec["precision_at_k"], rec["runtime_seconds"])
        records.append(rec)
    recalls = [r["recall_at_k"] for r in records if r["recall_at_k"] is not None]
    precisions = [r["precision_at_k"] for r in records if r["precision_at_k"] is not None]
    runtimes = [r["runtime_seconds"] for r in records]
    report = {
        "schema_version": SCHEMA_VERSION,
        "method": cfg.method,
        "k": cfg.k,
        "config": cfg.as_dict(),
        "graph": {"n": g.n, "m": g.m},
        "runs": records,
        "summary": {
            "recall_mean": float(np.mean(recalls)) if recalls else None,
            "recall_std": _std(recalls) if recalls else None,
            "precision_mean": float(np.mean(precisions)) if precisions else None,
            "precision_std": _std(precisions) if precisions else None,
            "runtime_mean": float(np.mean(runtimes)),
        },
    }
    if out is not None:
        with open(out / "report.json", "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report
