# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# distutils: language = c++
"""Compiled join kernels.

Signatures and results mirror ``labelpart._pykernels`` exactly; see that
module for the grid and bucket conventions.  Query kernels release the GIL so
callers may run disjoint query ranges on several threads.
"""

import numpy as np

from libc.stdint cimport int64_t, uint8_t
from libcpp.vector cimport vector

ctypedef int64_t i64

NAME = "cython"


cdef inline bint _hit(double axl, double ayl, double axu, double ayu,
                      double bxl, double byl, double bxu, double byu) noexcept nogil:
    return bxl <= axu and axl <= bxu and byl <= ayu and ayl <= byu


cdef object _as_array(vector[i64]& v):
    out = np.empty(v.size(), dtype=np.int64)
    cdef i64[::1] o = out
    cdef size_t k
    for k in range(v.size()):
        o[k] = v[k]
    return out


cdef inline i64 _locate(double c, const double[::1] bounds, i64 n, double lo, double width) noexcept nogil:
    cdef i64 i = <i64>((c - lo) / width)
    if i < 0:
        i = 0
    if i > n - 1:
        i = n - 1
    while i > 0 and c < bounds[i]:
        i -= 1
    while i < n - 1 and c >= bounds[i + 1]:
        i += 1
    return i


def build_two_layer(const i64[::1] ix0, const i64[::1] ix1, const i64[::1] iy0,
                    const i64[::1] iy1, i64 nx, i64 ny):
    cdef i64 n = ix0.shape[0], nb = nx * ny * 4
    cdef i64 r, i, j, i0, j0, b
    offsets = np.zeros(nb + 1, dtype=np.int64)
    cdef i64[::1] off = offsets
    with nogil:
        for r in range(n):
            i0 = ix0[r]
            if i0 < 0:
                continue
            j0 = iy0[r]
            for i in range(i0, ix1[r] + 1):
                for j in range(j0, iy1[r] + 1):
                    off[(i * ny + j) * 4 + 2 * (i > i0) + (j > j0) + 1] += 1
        for b in range(nb):
            off[b + 1] += off[b]
    entries = np.empty(off[nb], dtype=np.int64)
    cursor_arr = offsets[:-1].copy()
    cdef i64[::1] ent = entries
    cdef i64[::1] cur = cursor_arr
    with nogil:
        for r in range(n):
            i0 = ix0[r]
            if i0 < 0:
                continue
            j0 = iy0[r]
            for i in range(i0, ix1[r] + 1):
                for j in range(j0, iy1[r] + 1):
                    b = (i * ny + j) * 4 + 2 * (i > i0) + (j > j0)
                    ent[cur[b]] = r
                    cur[b] += 1
    return offsets, entries


def build_ig(const i64[::1] ix0, const i64[::1] ix1, const i64[::1] iy0,
             const i64[::1] iy1, i64 nx, i64 ny):
    cdef i64 n = ix0.shape[0], nt = nx * ny
    cdef i64 r, i, j, t
    offsets = np.zeros(nt + 1, dtype=np.int64)
    cdef i64[::1] off = offsets
    with nogil:
        for r in range(n):
            if ix0[r] < 0:
                continue
            for i in range(ix0[r], ix1[r] + 1):
                for j in range(iy0[r], iy1[r] + 1):
                    off[i * ny + j + 1] += 1
        for t in range(nt):
            off[t + 1] += off[t]
    entries = np.empty(off[nt], dtype=np.int64)
    cursor_arr = offsets[:-1].copy()
    cdef i64[::1] ent = entries
    cdef i64[::1] cur = cursor_arr
    with nogil:
        for r in range(n):
            if ix0[r] < 0:
                continue
            for i in range(ix0[r], ix1[r] + 1):
                for j in range(iy0[r], iy1[r] + 1):
                    t = i * ny + j
                    ent[cur[t]] = r
                    cur[t] += 1
    return offsets, entries


def query_two_layer(const i64[::1] offsets, const i64[::1] entries,
                    const double[::1] exl, const double[::1] eyl,
                    const double[::1] exu, const double[::1] eyu,
                    const double[::1] qxl, const double[::1] qyl,
                    const double[::1] qxu, const double[::1] qyu,
                    const i64[::1] qix0, const i64[::1] qix1,
                    const i64[::1] qiy0, const i64[::1] qiy1,
                    const i64[::1] qself, i64 ny, i64 start, i64 stop):
    counts = np.zeros(stop - start, dtype=np.int64)
    cdef i64[::1] cnt = counts
    cdef vector[i64] nbrs
    cdef i64 tests = 0, tiles = 0
    cdef i64 q, i, j, c, k, r, i0, j0, me, base, skip, xmask, found
    cdef double wxl, wyl, wxu, wyu
    with nogil:
        for q in range(start, stop):
            i0 = qix0[q]
            if i0 < 0:
                continue
            j0 = qiy0[q]
            me = qself[q]
            wxl = qxl[q]
            wyl = qyl[q]
            wxu = qxu[q]
            wyu = qyu[q]
            found = 0
            for i in range(i0, qix1[q] + 1):
                xmask = 2 if i > i0 else 0
                for j in range(j0, qiy1[q] + 1):
                    skip = xmask | (1 if j > j0 else 0)
                    tiles += 1
                    base = (i * ny + j) * 4
                    for c in range(4):
                        if c & skip:
                            continue
                        for k in range(offsets[base + c], offsets[base + c + 1]):
                            r = entries[k]
                            if r == me:
                                continue
                            tests += 1
                            if _hit(wxl, wyl, wxu, wyu, exl[k], eyl[k], exu[k], eyu[k]):
                                nbrs.push_back(r)
                                found += 1
            cnt[q - start] = found
    return counts, _as_array(nbrs), tests, tiles


def query_ig(const i64[::1] offsets, const i64[::1] entries,
             const double[::1] exl, const double[::1] eyl,
             const double[::1] exu, const double[::1] eyu,
             const double[::1] qxl, const double[::1] qyl,
             const double[::1] qxu, const double[::1] qyu,
             const i64[::1] qix0, const i64[::1] qix1,
             const i64[::1] qiy0, const i64[::1] qiy1,
             const i64[::1] qself, const double[::1] xbounds,
             const double[::1] ybounds, i64 start, i64 stop):
    cdef i64 nx = xbounds.shape[0] - 1, ny = ybounds.shape[0] - 1
    cdef double xlo = xbounds[0], ylo = ybounds[0]
    cdef double tw = (xbounds[nx] - xlo) / nx, th = (ybounds[ny] - ylo) / ny
    counts = np.zeros(stop - start, dtype=np.int64)
    cdef i64[::1] cnt = counts
    cdef vector[i64] nbrs
    cdef i64 tests = 0, examined = 0, tiles = 0
    cdef i64 q, i, j, k, r, t, i0, j0, me, found
    cdef double wxl, wyl, wxu, wyu, px, py
    with nogil:
        for q in range(start, stop):
            i0 = qix0[q]
            if i0 < 0:
                continue
            j0 = qiy0[q]
            me = qself[q]
            wxl = qxl[q]
            wyl = qyl[q]
            wxu = qxu[q]
            wyu = qyu[q]
            found = 0
            for i in range(i0, qix1[q] + 1):
                for j in range(j0, qiy1[q] + 1):
                    tiles += 1
                    t = i * ny + j
                    for k in range(offsets[t], offsets[t + 1]):
                        r = entries[k]
                        if r == me:
                            continue
                        tests += 1
                        if _hit(wxl, wyl, wxu, wyu, exl[k], eyl[k], exu[k], eyu[k]):
                            examined += 1
                            px = wxl if wxl > exl[k] else exl[k]
                            py = wyl if wyl > eyl[k] else eyl[k]
                            if (_locate(px, xbounds, nx, xlo, tw) == i
                                    and _locate(py, ybounds, ny, ylo, th) == j):
                                nbrs.push_back(r)
                                found += 1
            cnt[q - start] = found
    return counts, _as_array(nbrs), tests, examined, tiles


def query_rtree(const double[::1] nxl, const double[::1] nyl,
                const double[::1] nxu, const double[::1] nyu,
                const i64[::1] cstart, const i64[::1] cend,
                const uint8_t[::1] is_leaf, const i64[::1] entry_order,
                const double[::1] exl, const double[::1] eyl,
                const double[::1] exu, const double[::1] eyu,
                const double[::1] qxl, const double[::1] qyl,
                const double[::1] qxu, const double[::1] qyu,
                const i64[::1] qself, i64 start, i64 stop):
    counts = np.zeros(stop - start, dtype=np.int64)
    cdef i64[::1] cnt = counts
    cdef vector[i64] nbrs
    cdef vector[i64] stack
    cdef i64 tests = 0, visited = 0
    cdef i64 q, k, r, ch, node, me, found
    cdef double wxl, wyl, wxu, wyu
    if nxl.shape[0] == 0:
        return counts, np.empty(0, dtype=np.int64), 0, 0
    with nogil:
        for q in range(start, stop):
            me = qself[q]
            wxl = qxl[q]
            wyl = qyl[q]
            wxu = qxu[q]
            wyu = qyu[q]
            found = 0
            tests += 1
            if not _hit(wxl, wyl, wxu, wyu, nxl[0], nyl[0], nxu[0], nyu[0]):
                continue
            stack.push_back(0)
            while stack.size() > 0:
                node = stack.back()
                stack.pop_back()
                visited += 1
                if is_leaf[node]:
                    for k in range(cstart[node], cend[node]):
                        r = entry_order[k]
                        if r == me:
                            continue
                        tests += 1
                        if _hit(wxl, wyl, wxu, wyu, exl[k], eyl[k], exu[k], eyu[k]):
                            nbrs.push_back(r)
                            found += 1
                else:
                    for ch in range(cstart[node], cend[node]):
                        tests += 1
                        if _hit(wxl, wyl, wxu, wyu, nxl[ch], nyl[ch], nxu[ch], nyu[ch]):
                            stack.push_back(ch)
            cnt[q - start] = found
    return counts, _as_array(nbrs), tests, visited


def brute_force_pairs(const double[::1] xl, const double[::1] yl,
                      const double[::1] xu, const double[::1] yu):
    cdef i64 n = xl.shape[0]
    cdef i64 a, b
    cdef double axl, ayl, axu, ayu
    cdef vector[i64] src
    cdef vector[i64] dst
    with nogil:
        for a in range(n):
            axl = xl[a]
            ayl = yl[a]
            axu = xu[a]
            ayu = yu[a]
            for b in range(a + 1, n):
                if _hit(axl, ayl, axu, ayu, xl[b], yl[b], xu[b], yu[b]):
                    src.push_back(a)
                    dst.push_back(b)
    return _as_array(src), _as_array(dst), n * (n - 1) // 2


cdef inline i64 _find(i64[::1] parent, i64 a) noexcept nogil:
    cdef i64 root = a, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        nxt = parent[a]
        parent[a] = root
        a = nxt
    return root


def component_roots(i64 n, const i64[::1] src, const i64[::1] dst):
    roots = np.arange(n, dtype=np.int64)
    cdef i64[::1] parent = roots
    cdef i64 e, ra, rb, a
    with nogil:
        for e in range(src.shape[0]):
            ra = _find(parent, src[e])
            rb = _find(parent, dst[e])
            if ra < rb:
                parent[rb] = ra
            elif rb < ra:
                parent[ra] = rb
        for a in range(n):
            parent[a] = _find(parent, a)
    return roots
