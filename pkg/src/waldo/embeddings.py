"""Node embeddings and the proximity models built on them.

Learned embeddings are read from text files and unit-normalised so that dot
product equals cosine similarity. CN and AA are expressed as (sparse)
embeddings too, which lets the LSH search treat every proximity except
Jaccard the same way.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import heuristics, kernels
from .graph import Graph, WaldoWarning

PROXIMITY_KINDS = ("emb", "CN", "JS", "AA")


class EmbeddingFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """``n x d`` node vectors, dense (learned) or sparse (heuristic reductions).

    Heuristic reductions carry ``pair_weights`` so pair scores can be computed
    by neighbourhood intersection, bit-identical to the heuristics module.
    """

    data: np.ndarray | sp.csr_matrix
    normalized: bool = False
    missing: int = 0
    graph: Graph | None = field(default=None, repr=False)
    pair_weights: np.ndarray | None = field(default=None, repr=False)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dims(self) -> int:
        return self.data.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.data)

    def row(self, v: int) -> np.ndarray:
        if self.is_sparse:
            return self.data.getrow(v).toarray().ravel()
        return self.data[v]

    def dot(self, u: int, v: int) -> float:
        return float(self.dot_pairs([u], [v])[0])

    def dot_pairs(self, us, vs, chunk: int = 65536) -> np.ndarray:
        """Dot products ``x_u . x_v`` for aligned index arrays."""
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        if self.pair_weights is not None:
            g = self.graph
            _, ws = kernels.pair_common(g.indptr, g.indices, self.pair_weights, us, vs)
            return ws
        out = np.empty(len(us), dtype=np.float64)
        for s in range(0, len(us), chunk):
            a, b = us[s:s + chunk], vs[s:s + chunk]
            if self.is_sparse:
                out[s:s + chunk] = np.asarray(
                    self.data[a].multiply(self.data[b]).sum(axis=1)
                ).ravel()
            else:
                out[s:s + chunk] = np.einsum("ij,ij->i", self.data[a], self.data[b])
        return out

    def project(self, nodes: np.ndarray, w: np.ndarray) -> np.ndarray:
        """``x_v . w`` for each node in ``nodes``."""
        return np.asarray(self.data[nodes] @ w).ravel()


def normalize(x: EmbeddingMatrix) -> EmbeddingMatrix:
    """Scale nonzero rows to unit L2 norm; zero rows stay zero."""
    if x.is_sparse:
        raise ValueError("heuristic reductions are never normalised")
    data = np.asarray(x.data, dtype=np.float64)
    norms = np.linalg.norm(data, axis=1)
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    return EmbeddingMatrix(data * scale[:, None], normalized=True, missing=x.missing)


def load_embeddings(path: str | Path, g: Graph) -> EmbeddingMatrix:
    """Read ``n d`` header then ``label v1 .. vd`` rows, aligned to ``g``'s indices.

    The header must declare ``g.n`` rows. Graph nodes absent from the file get
    an all-zero row and a warning.
    """
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise EmbeddingFormatError(f"{path}: header must be 'n d'")
        n, d = int(header[0]), int(header[1])
        if n != g.n:
            raise EmbeddingFormatError(
                f"{path}: header declares {n} nodes but the graph has {g.n}"
            )
        data = np.zeros((g.n, d), dtype=np.float64)
        seen = np.zeros(g.n, dtype=bool)
        for lineno, line in enumerate(fh, start=2):
            tokens = line.split()
            if not tokens:
                continue
            if len(tokens) != d + 1:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected {d} values, got {len(tokens) - 1}"
                )
            try:
                v = g.index_of(tokens[0])
            except KeyError:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: node {tokens[0]!r} is not in the graph"
                ) from None
            data[v] = [float(t) for t in tokens[1:]]
            seen[v] = True
    missing = int((~seen).sum())
    if missing:
        warnings.warn(
            f"{missing} graph node(s) missing from {path}; using zero vectors",
            WaldoWarning,
            stacklevel=2,
        )
    return normalize(EmbeddingMatrix(data, missing=missing))


def _adjacency(g: Graph, values: np.ndarray) -> sp.csr_matrix:
    return sp.csr_matrix((values, g.indices, g.indptr), shape=(g.n, g.n))


def cn_embeddings(g: Graph) -> EmbeddingMatrix:
    """Adjacency rows: ``x_u . x_v`` is the common-neighbour count."""
    return EmbeddingMatrix(
        _adjacency(g, np.ones(len(g.indices))),
        graph=g,
        pair_weights=np.ones(g.n),
    )


def aa_embeddings(g: Graph) -> EmbeddingMatrix:
    """Adjacency scaled by 1/sqrt(ln deg) of the column node, so dots give AA."""
    w = heuristics.adamic_adar_weights(g.degrees)
    return EmbeddingMatrix(
        _adjacency(g, np.sqrt(w)[g.indices]),
        graph=g,
        pair_weights=w,
    )


@dataclass(eq=False)
class ProximityModel:
    """A pair scorer ``s(u, v)``; ``vectors`` is its dot-product form, if any."""

    kind: str
    graph: Graph
    embeddings: EmbeddingMatrix | None = None

    def __post_init__(self):
        kind = self.kind if self.kind == "emb" else self.kind.upper()
        if kind not in PROXIMITY_KINDS:
            raise ValueError(f"unknown proximity {self.kind!r}")
        self.kind = kind
        if kind == "emb":
            if self.embeddings is None:
                raise ValueError("embedding proximity needs an EmbeddingMatrix")
            if self.embeddings.rows != self.graph.n:
                raise ValueError("embedding rows do not match the graph")
            if not self.embeddings.normalized:
                self.embeddings = normalize(self.embeddings)
        self._vectors = None

    @property
    def is_heuristic(self) -> bool:
        return self.kind != "emb"

    @property
    def vectors(self) -> EmbeddingMatrix | None:
        if self.kind == "emb":
            return self.embeddings
        if self._vectors is None and self.kind in ("CN", "AA"):
            self._vectors = (cn_embeddings if self.kind == "CN" else aa_embeddings)(self.graph)
        return self._vectors

    def score_pairs(self, us, vs) -> np.ndarray:
        if self.kind == "emb":
            return self.embeddings.dot_pairs(us, vs)
        return heuristics.score_pairs(self.graph, self.kind, us, vs)
