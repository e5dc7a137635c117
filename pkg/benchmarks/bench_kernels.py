"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--nodes 20000] [--repeat 3]

Each kernel is timed under both backends on the same inputs; outputs are
checked for exact equality before the timings are reported.
"""
import argparse
import sys
import time
import warnings

import numpy as np

from waldo import kernels
from waldo.graph import Graph
from waldo.grouping import degree_log_bins
from waldo.embeddings import ProximityModel
from waldo.selector import run_linkwaldo


def config_graph(n, seed=0, dmax=40):
    rng = np.random.default_rng(seed)
    deg = np.minimum(rng.zipf(2.2, n), dmax)
    stubs = np.repeat(np.arange(n), deg)
    rng.shuffle(stubs)
    stubs = stubs[: len(stubs) // 2 * 2].reshape(-1, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return Graph.from_edges(n, stubs[:, 0], stubs[:, 1])


def timed(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def canon(parts):
    order = np.lexsort((parts[1], parts[0]))
    return tuple(np.asarray(x)[order] for x in parts)


def same(a, b):
    if isinstance(a, tuple):
        # two_hop emits pairs in an unspecified order
        a, b = canon(a), canon(b)
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    if hasattr(a, "pairs"):
        return np.array_equal(a.pairs, b.pairs) and np.array_equal(a.scores, b.scores)
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the python backend is available", file=sys.stderr)
        return 1

    g = config_graph(args.nodes)
    w = 1.0 / np.log(np.maximum(g.degrees, 2))
    rng = np.random.default_rng(1)
    us = rng.integers(0, g.n, 200_000)
    vs = rng.integers(0, g.n, 200_000)
    codes = rng.integers(0, 64, g.n)
    half = g.n // 2
    lnodes, rnodes = np.arange(half), np.arange(half, g.n)
    lc, rc = np.sort(codes[:half]), np.sort(codes[half:])
    total = int(sum(np.sum(lc == c) * np.sum(rc == c) for c in range(64)))
    grouping = degree_log_bins(g, 25)
    pm = ProximityModel("AA", g)

    cases = {
        "two_hop": lambda: kernels.two_hop(g.indptr, g.indices, w, 0, g.n),
        "pair_common": lambda: kernels.pair_common(g.indptr, g.indices, w, us, vs),
        "has_edges": lambda: kernels.has_edges(g.indptr, g.indices, us, vs),
        "bucket_pairs": lambda: kernels.bucket_pairs(lc, lnodes, rc, rnodes, False, total),
        "linkwaldo (exact)": lambda: run_linkwaldo(g, grouping, pm, 10_000, tau=10**15, zeta=0.0),
        "linkwaldo (lsh)": lambda: run_linkwaldo(g, grouping, pm, 10_000, tau=1, zeta=0.0),
    }
    print(f"graph: n={g.n} m={g.m}; best of {args.repeat}")
    print(f"{'kernel':<20}{'cython s':>10}{'python s':>10}{'speedup':>9}  equal")
    for name, fn in cases.items():
        with kernels.use_backend("cython"):
            tc, oc = timed(fn, args.repeat)
        with kernels.use_backend("python"):
            tp, op = timed(fn, args.repeat)
        print(f"{name:<20}{tc:>10.4f}{tp:>10.4f}{tp / tc:>8.1f}x  {same(oc, op)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
