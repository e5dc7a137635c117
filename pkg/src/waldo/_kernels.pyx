# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. ``waldo._pykernels`` mirrors every function here.

Floating-point sums run over shared neighbours in ascending index order in
both backends, so the two produce bit-identical scores.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32


def two_hop(const i64[::1] indptr, const i32[::1] indices, const double[::1] weights,
            i64 start, i64 stop):
    """Unlinked pairs (u, x), start <= u < stop, u < x, with a common neighbour.

    Returns ``(us, vs, cn, wsum)``; ``wsum`` accumulates ``weights[w]`` over the
    shared neighbours ``w`` in ascending order.
    """
    cdef i64 n = indptr.shape[0] - 1
    cdef i64[::1] seen = np.full(n, -1, dtype=np.int64)
    cdef i64[::1] adj = np.full(n, -1, dtype=np.int64)
    cdef i32[::1] acc_cn = np.zeros(n, dtype=np.int32)
    cdef double[::1] acc_w = np.zeros(n, dtype=np.float64)
    cdef i32[::1] touched = np.empty(n, dtype=np.int32)
    cdef i64 cap = 1024
    cdef i64 size = 0
    out_u = np.empty(cap, dtype=np.int32)
    out_v = np.empty(cap, dtype=np.int32)
    out_c = np.empty(cap, dtype=np.int32)
    out_s = np.empty(cap, dtype=np.float64)
    cdef i32[::1] ou = out_u
    cdef i32[::1] ov = out_v
    cdef i32[::1] oc = out_c
    cdef double[::1] os = out_s
    cdef i64 u, a, b, w, x, nt, t
    cdef double wt
    for u in range(start, stop):
        for a in range(indptr[u], indptr[u + 1]):
            adj[indices[a]] = u
        nt = 0
        for a in range(indptr[u], indptr[u + 1]):
            w = indices[a]
            wt = weights[w]
            for b in range(indptr[w], indptr[w + 1]):
                x = indices[b]
                if x <= u or adj[x] == u:
                    continue
                if seen[x] != u:
                    seen[x] = u
                    acc_cn[x] = 0
                    acc_w[x] = 0.0
                    touched[nt] = <i32>x
                    nt += 1
                acc_cn[x] += 1
                acc_w[x] += wt
        if size + nt > cap:
            while size + nt > cap:
                cap *= 2
            out_u = np.resize(out_u, cap)
            out_v = np.resize(out_v, cap)
            out_c = np.resize(out_c, cap)
            out_s = np.resize(out_s, cap)
            ou = out_u
            ov = out_v
            oc = out_c
            os = out_s
        for t in range(nt):
            x = touched[t]
            ou[size] = <i32>u
            ov[size] = <i32>x
            oc[size] = acc_cn[x]
            os[size] = acc_w[x]
            size += 1
    return out_u[:size].copy(), out_v[:size].copy(), out_c[:size].copy(), out_s[:size].copy()


def pair_common(const i64[::1] indptr, const i32[::1] indices, const double[::1] weights,
                const i64[::1] us, const i64[::1] vs):
    """Common-neighbour count and weighted sum for each (us[i], vs[i])."""
    cdef i64 p, npairs = us.shape[0]
    cn_arr = np.zeros(npairs, dtype=np.int32)
    ws_arr = np.zeros(npairs, dtype=np.float64)
    cdef i32[::1] cn = cn_arr
    cdef double[::1] ws = ws_arr
    cdef i64 a, a_end, b, b_end, x, y, c
    cdef double s
    for p in range(npairs):
        a = indptr[us[p]]
        a_end = indptr[us[p] + 1]
        b = indptr[vs[p]]
        b_end = indptr[vs[p] + 1]
        c = 0
        s = 0.0
        while a < a_end and b < b_end:
            x = indices[a]
            y = indices[b]
            if x == y:
                c += 1
                s += weights[x]
                a += 1
                b += 1
            elif x < y:
                a += 1
            else:
                b += 1
        cn[p] = <i32>c
        ws[p] = s
    return cn_arr, ws_arr


def has_edges(const i64[::1] indptr, const i32[::1] indices,
              const i64[::1] us, const i64[::1] vs):
    """Edge membership by binary search in the lower-degree endpoint's list."""
    cdef i64 p, npairs = us.shape[0]
    out = np.zeros(npairs, dtype=np.bool_)
    cdef cnp.uint8_t[::1] o = out.view(np.uint8)
    cdef i64 s, t, lo, hi, mid, target
    for p in range(npairs):
        s = us[p]
        t = vs[p]
        if indptr[s + 1] - indptr[s] > indptr[t + 1] - indptr[t]:
            s, t = t, s
        lo = indptr[s]
        hi = indptr[s + 1]
        target = t
        while lo < hi:
            mid = (lo + hi) >> 1
            if indices[mid] < target:
                lo = mid + 1
            else:
                hi = mid
        if lo < indptr[s + 1] and indices[lo] == target:
            o[p] = 1
    return out


def bucket_pairs(const i64[::1] lcodes, const i64[::1] lnodes,
                 const i64[::1] rcodes, const i64[::1] rnodes,
                 bint diagonal, i64 total):
    """Canonical (min, max) pairs sharing a bucket code.

    Codes must be sorted ascending with nodes aligned. For ``diagonal`` the
    right-hand arrays are ignored and pairs are drawn within the left set.
    ``total`` is the exact pair count (the bucket volume).
    """
    out_u = np.empty(total, dtype=np.int64)
    out_v = np.empty(total, dtype=np.int64)
    cdef i64[::1] ou = out_u
    cdef i64[::1] ov = out_v
    cdef i64 size = 0
    cdef i64 nl = lcodes.shape[0]
    cdef i64 nr = rcodes.shape[0]
    cdef i64 i = 0, j = 0, i_end, j_end, a, b, x, y, code
    if diagonal:
        while i < nl:
            i_end = i
            while i_end < nl and lcodes[i_end] == lcodes[i]:
                i_end += 1
            for a in range(i, i_end):
                for b in range(a + 1, i_end):
                    x = lnodes[a]
                    y = lnodes[b]
                    if x < y:
                        ou[size] = x
                        ov[size] = y
                    else:
                        ou[size] = y
                        ov[size] = x
                    size += 1
            i = i_end
    else:
        while i < nl and j < nr:
            if lcodes[i] < rcodes[j]:
                i += 1
            elif lcodes[i] > rcodes[j]:
                j += 1
            else:
                code = lcodes[i]
                i_end = i
                while i_end < nl and lcodes[i_end] == code:
                    i_end += 1
                j_end = j
                while j_end < nr and rcodes[j_end] == code:
                    j_end += 1
                for a in range(i, i_end):
                    for b in range(j, j_end):
                        x = lnodes[a]
                        y = rnodes[b]
                        if x < y:
                            ou[size] = x
                            ov[size] = y
                        else:
                            ou[size] = y
                            ov[size] = x
                        size += 1
                i = i_end
                j = j_end
    return out_u[:size], out_v[:size]
