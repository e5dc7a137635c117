"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and bit-identical results; used when the extension is not
built or when ``WALDO_PURE_PYTHON`` is set.
"""
import numpy as np

# bound on the (u, w, x) triples materialised at once by two_hop
_TRIPLE_BLOCK = 4_000_000


def _expand(indptr, nodes):
    """Concatenated neighbour lists of ``nodes`` plus the owning position."""
    starts = indptr[nodes]
    lengths = indptr[nodes + 1] - starts
    total = int(lengths.sum())
    owner = np.repeat(np.arange(len(nodes)), lengths)
    offsets = np.arange(total) - np.repeat(np.cumsum(lengths) - lengths, lengths)
    return owner, starts[owner] + offsets


def _directed_keys(indptr, indices):
    n = len(indptr) - 1
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    return src * n + indices.astype(np.int64)


def two_hop(indptr, indices, weights, start, stop):
    n = len(indptr) - 1
    edge_keys = _directed_keys(indptr, indices)
    deg = np.diff(indptr)
    # Σ_{w ∈ N(u)} deg(w) triples per source; chunk sources to bound memory
    per_source = np.zeros(n, dtype=np.int64)
    if len(indices):
        src = np.repeat(np.arange(n), deg)
        np.add.at(per_source, src, deg[indices])
    out = ([], [], [], [])
    u0 = start
    while u0 < stop:
        u1 = u0 + 1
        load = per_source[u0]
        while u1 < stop and load + per_source[u1] <= _TRIPLE_BLOCK:
            load += per_source[u1]
            u1 += 1
        sources = np.arange(u0, u1, dtype=np.int64)
        own1, pos1 = _expand(indptr, sources)
        u_of = sources[own1]
        w_of = indices[pos1].astype(np.int64)
        own2, pos2 = _expand(indptr, w_of)
        uu = u_of[own2]
        ww = w_of[own2]
        xx = indices[pos2].astype(np.int64)
        keys = uu * n + xx
        keep = xx > uu
        if len(edge_keys):
            at = np.searchsorted(edge_keys, keys)
            at[at == len(edge_keys)] = 0
            keep &= edge_keys[at] != keys
        keys = keys[keep]
        ww = ww[keep]
        uniq, inv = np.unique(keys, return_inverse=True)
        cn = np.bincount(inv, minlength=len(uniq)).astype(np.int32)
        ws = np.zeros(len(uniq), dtype=np.float64)
        # ufunc.at applies updates in array order, i.e. ascending w per pair
        np.add.at(ws, inv, weights[ww])
        out[0].append((uniq // n).astype(np.int32))
        out[1].append((uniq % n).astype(np.int32))
        out[2].append(cn)
        out[3].append(ws)
        u0 = u1
    if not out[0]:
        return (np.empty(0, np.int32), np.empty(0, np.int32),
                np.empty(0, np.int32), np.empty(0, np.float64))
    return tuple(np.concatenate(parts) for parts in out)


def pair_common(indptr, indices, weights, us, vs):
    cn = np.zeros(len(us), dtype=np.int32)
    ws = np.zeros(len(us), dtype=np.float64)
    for p, (u, v) in enumerate(zip(us.tolist(), vs.tolist())):
        shared = np.intersect1d(indices[indptr[u]:indptr[u + 1]],
                                indices[indptr[v]:indptr[v + 1]],
                                assume_unique=True)
        s = 0.0
        for w in shared.tolist():
            s += float(weights[w])
        cn[p] = len(shared)
        ws[p] = s
    return cn, ws


def has_edges(indptr, indices, us, vs):
    n = len(indptr) - 1
    edge_keys = _directed_keys(indptr, indices)
    if len(edge_keys) == 0:
        return np.zeros(len(us), dtype=bool)
    keys = np.asarray(us, dtype=np.int64) * n + np.asarray(vs, dtype=np.int64)
    at = np.searchsorted(edge_keys, keys)
    at[at == len(edge_keys)] = 0
    return edge_keys[at] == keys


def bucket_pairs(lcodes, lnodes, rcodes, rnodes, diagonal, total):
    us, vs = [], []
    lbounds = np.flatnonzero(np.diff(lcodes)) + 1
    lgroups = np.split(np.arange(len(lcodes)), lbounds) if len(lcodes) else []
    if diagonal:
        for grp in lgroups:
            if len(grp) < 2:
                continue
            nodes = lnodes[grp]
            a, b = np.triu_indices(len(nodes), k=1)
            us.append(nodes[a])
            vs.append(nodes[b])
    else:
        right = {}
        if len(rcodes):
            rbounds = np.flatnonzero(np.diff(rcodes)) + 1
            for grp in np.split(np.arange(len(rcodes)), rbounds):
                right[int(rcodes[grp[0]])] = rnodes[grp]
        for grp in lgroups:
            partner = right.get(int(lcodes[grp[0]]))
            if partner is None:
                continue
            a = np.repeat(lnodes[grp], len(partner))
            b = np.tile(partner, len(grp))
            us.append(a)
            vs.append(b)
    if not us:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    u = np.concatenate(us).astype(np.int64)
    v = np.concatenate(vs).astype(np.int64)
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    assert len(lo) == total
    return lo, hi
