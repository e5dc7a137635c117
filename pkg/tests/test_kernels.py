"""The compiled and numpy backends must agree bit for bit."""
import numpy as np
import pytest

from waldo import kernels
from waldo.embeddings import ProximityModel
from waldo.grouping import degree_log_bins
from waldo.heuristics import rank_two_hop
from waldo.selector import run_linkwaldo

import oracles

needs_ext = pytest.mark.skipif("cython" not in kernels.available_backends(),
                               reason="compiled extension not built")


def canon(us, vs, *rest):
    order = np.lexsort((vs, us))
    return (us[order], vs[order]) + tuple(r[order] for r in rest)


@needs_ext
@pytest.mark.parametrize("seed", range(6))
def test_two_hop_backends_agree(seed):
    g = oracles.noisy_graph(300, 1500, seed)
    w = np.random.default_rng(seed).random(g.n)
    c = kernels.compiled_backend.two_hop(g.indptr, g.indices, w, 0, g.n)
    p = kernels.python_backend.two_hop(g.indptr, g.indices, w, 0, g.n)
    for a, b in zip(canon(*c), canon(*p)):
        assert np.array_equal(a, b)


@needs_ext
def test_two_hop_ranges_agree():
    g = oracles.noisy_graph(200, 900, 3)
    w = np.ones(g.n)
    for start, stop in [(0, 1), (5, 80), (150, 200), (199, 200)]:
        c = canon(*kernels.compiled_backend.two_hop(g.indptr, g.indices, w, start, stop))
        p = canon(*kernels.python_backend.two_hop(g.indptr, g.indices, w, start, stop))
        for a, b in zip(c, p):
            assert np.array_equal(a, b)


@needs_ext
def test_pair_common_and_has_edges_agree():
    g = oracles.noisy_graph(150, 800, 4)
    rng = np.random.default_rng(0)
    us = rng.integers(0, g.n, 5000)
    vs = rng.integers(0, g.n, 5000)
    w = rng.random(g.n)
    c = kernels.compiled_backend.pair_common(g.indptr, g.indices, w, us, vs)
    p = kernels.python_backend.pair_common(g.indptr, g.indices, w, us, vs)
    assert np.array_equal(c[0], p[0]) and np.array_equal(c[1], p[1])
    assert np.array_equal(kernels.compiled_backend.has_edges(g.indptr, g.indices, us, vs),
                          kernels.python_backend.has_edges(g.indptr, g.indices, us, vs))


@needs_ext
@pytest.mark.parametrize("diagonal", [True, False])
def test_bucket_pairs_agree(diagonal):
    rng = np.random.default_rng(1)
    lnodes = np.arange(0, 40)
    rnodes = lnodes if diagonal else np.arange(40, 90)
    lcodes = np.sort(rng.integers(0, 6, len(lnodes)))
    rcodes = lcodes if diagonal else np.sort(rng.integers(0, 6, len(rnodes)))
    from waldo.lsh import bucket_volume

    total = bucket_volume(lcodes, None if diagonal else rcodes)
    args = (lcodes, lnodes, rcodes, rnodes, diagonal, total)
    c = kernels.compiled_backend.bucket_pairs(*args)
    p = kernels.python_backend.bucket_pairs(*args)
    assert len(c[0]) == total
    assert np.array_equal(np.sort(c[0] * 1000 + c[1]), np.sort(p[0] * 1000 + p[1]))
    assert np.all(c[0] < c[1])


@needs_ext
@pytest.mark.parametrize("kind", ["AA", "JS"])
def test_end_to_end_identical(kind):
    g = oracles.noisy_graph(250, 1200, 9)
    grouping = degree_log_bins(g, 4)
    runs = {}
    for name in ("cython", "python"):
        with kernels.use_backend(name):
            ranked = rank_two_hop(g, kind)
            cands = run_linkwaldo(g, grouping, ProximityModel(kind, g), 400, tau=2000, zeta=0.3)
            runs[name] = (ranked, cands)
    (r1, c1), (r2, c2) = runs["cython"], runs["python"]
    for a, b in zip(r1, r2):
        assert np.array_equal(a, b)
    assert np.array_equal(c1.pairs, c2.pairs)
    assert np.array_equal(c1.scores, c2.scores)


def test_use_backend_rejects_unknown():
    with pytest.raises(ValueError):
        with kernels.use_backend("fortran"):
            pass


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
