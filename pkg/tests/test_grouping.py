import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from waldo.embeddings import EmbeddingMatrix
from waldo.graph import Graph
from waldo.grouping import (
    NodeGrouping,
    cluster_embeddings,
    combine,
    degree_log_bins,
    format_key,
    partition_pairs,
)
from waldo.roadmap import class_counts

import oracles


def graph_with_degrees(degrees):
    """Hub-and-leaf graph where node i has degree ``degrees[i]``."""
    us, vs = [], []
    nxt = len(degrees)
    for i, d in enumerate(degrees):
        for _ in range(d):
            us.append(i)
            vs.append(nxt)
            nxt += 1
    return Graph.from_edges(nxt, us, vs)


def test_degree_bins_by_hand():
    g = graph_with_degrees([1, 2, 4, 8])
    bins = degree_log_bins(g, 4).membership[:4, 0]
    # leaves have degree 1 and share bin 0 with node 0
    assert bins.tolist() == [0, 1, 2, 3]


def test_degree_bins_equal_degrees():
    g = Graph.from_edges(4, [0, 2], [1, 3])
    assert degree_log_bins(g, 10).membership[:, 0].tolist() == [0, 0, 0, 0]


def test_single_bin_and_isolated():
    g = Graph.from_edges(6, [0, 0, 0, 1], [1, 2, 3, 2])
    gr = degree_log_bins(g, 1)
    assert gr.group_count == 1
    assert degree_log_bins(g, 5).membership[5, 0] == 0
    with pytest.raises(ValueError):
        degree_log_bins(g, 0)


def test_bins_are_dense():
    g = graph_with_degrees([1, 100])
    m = degree_log_bins(g, 25).membership[:, 0]
    assert sorted(set(m.tolist())) == list(range(len(set(m.tolist()))))


def test_kmeans_separated_clouds():
    rng = np.random.default_rng(0)
    a = rng.normal(0, 0.05, (30, 3)) + [5, 0, 0]
    b = rng.normal(0, 0.05, (20, 3)) + [-5, 0, 0]
    x = EmbeddingMatrix(np.vstack([a, b]))
    labels = cluster_embeddings(x, 2, seed=1).membership[:, 0]
    # oracle: nearest of the two cloud centres
    truth = (np.vstack([a, b])[:, 0] < 0).astype(int)
    assert len(set(zip(labels.tolist(), truth.tolist()))) == 2


def test_kmeans_edge_cases():
    x = EmbeddingMatrix(np.random.default_rng(2).normal(size=(6, 2)))
    assert cluster_embeddings(x, 1).membership[:, 0].tolist() == [0] * 6
    assert sorted(cluster_embeddings(x, 6).membership[:, 0].tolist()) == list(range(6))
    with pytest.raises(ValueError):
        cluster_embeddings(x, 7)
    a = cluster_embeddings(x, 3, seed=5).membership
    b = cluster_embeddings(x, 3, seed=5).membership
    assert np.array_equal(a, b)


def test_combine():
    a = NodeGrouping(np.array([0, 0, 1, 1, 2, 2]), "DG")
    b = NodeGrouping(np.array([0, 1, 0, 1, 0, 1]), "SG")
    mg = combine([a, b])
    assert mg.kind == "MG" and mg.membership.shape == (6, 2)
    assert len({tuple(r) for r in mg.membership.tolist()}) <= 6
    only = combine([a])
    assert np.array_equal(partition_pairs(only)._codes, partition_pairs(a)._codes)
    with pytest.raises(ValueError):
        combine([a, NodeGrouping(np.zeros(3, dtype=int), "SG")])
    with pytest.raises(ValueError):
        combine([])


def test_two_groups_class_sizes():
    part = partition_pairs(NodeGrouping(np.array([0, 0, 0, 1, 1]), "DG"))
    sizes = {format_key(part.key(i)): int(c) for i, c in enumerate(part.pair_counts)}
    assert sizes == {"0|0": 3, "0|1": 6, "1|1": 1}


def test_single_class():
    part = partition_pairs(NodeGrouping(np.zeros(7, dtype=int), "DG"))
    assert len(part) == 1 and part.pair_counts[0] == 21
    assert part[0].diagonal


def test_class_of_symmetric():
    part = partition_pairs(NodeGrouping(np.array([0, 1, 2, 1]), "DG"))
    for u in range(4):
        for v in range(4):
            if u != v:
                assert part.class_of(u, v) == part.class_of(v, u)
    with pytest.raises(ValueError):
        part.class_of(1, 1)


def test_empty_classes_dropped():
    part = partition_pairs(NodeGrouping(np.array([0, 1, 1]), "DG"))
    # the singleton group has no internal pairs
    assert [format_key(k) for k in (part.key(i) for i in range(len(part)))] == ["0|1", "1|1"]


def check_partition(membership):
    grouping = NodeGrouping(membership, "MG")
    part = partition_pairs(grouping)
    want = oracles.classes_by_signature(grouping.membership)
    n = grouping.n
    assert int(part.pair_counts.sum()) == n * (n - 1) // 2
    got = {}
    for cls in part:
        pairs = {tuple(p) for p in cls.pairs().tolist()}
        assert len(pairs) == cls.pair_count
        lazy = np.concatenate(list(cls.iter_canonical(chunk=7)))
        assert [tuple(p) for p in lazy.tolist()] == sorted(pairs)
        got[cls.key] = pairs
    assert got == want
    if n >= 2:
        a, b = np.triu_indices(n, k=1)
        idx = part.class_index(a, b)
        for u, v, i in zip(a.tolist(), b.tolist(), idx.tolist()):
            assert (u, v) in got[part.key(i)]


@pytest.mark.parametrize("seed", range(10))
def test_partition_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 60))
    cols = int(rng.integers(1, 4))
    check_partition(rng.integers(0, 4, (n, cols)))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 2)), min_size=2, max_size=25))
def test_partition_law(rows):
    check_partition(np.array(rows))


def test_every_edge_in_one_class():
    g = oracles.random_graph(80, 0.1, 3)
    part = partition_pairs(degree_log_bins(g, 6))
    assert int(class_counts(part, g.edges).sum()) == g.m


def test_write_csv(tmp_path):
    g = Graph.from_edges(3, [0], [1], labels=["x", "y", "z"])
    gr = combine([NodeGrouping(np.array([0, 1, 1]), "DG"), NodeGrouping(np.array([1, 0, 1]), "SG")])
    path = tmp_path / "groups.csv"
    gr.write_csv(path, g)
    rows = list(csv.reader(open(path)))
    assert rows == [["node", "group_0", "group_1"], ["x", "0", "1"], ["y", "1", "0"], ["z", "1", "1"]]
