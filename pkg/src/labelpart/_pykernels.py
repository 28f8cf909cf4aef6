"""Pure-Python join kernels.

Reference implementation of the kernel interface; ``_core.pyx`` mirrors every
function here with identical signatures and results.  Inputs are numpy arrays
(float64 coordinates, int64 indices); outputs are numpy arrays plus plain ints.

Grid conventions shared by all kernels:

* a rect's tile range is ``ix0..ix1`` × ``iy0..iy1`` (inclusive); ``ix0 < 0``
  marks a rect outside the grid domain, which is neither stored nor queried;
* tile ``(i, j)`` has linear id ``i * ny + j``;
* two-layer buckets are ``tile_id * 4 + cls`` with classes A=0, B=1, C=2, D=3.
  Bit 1 of the class means "starts before the tile in x", bit 0 "in y";
* query kernels read stored coordinates in slot order (``exl[k]`` belongs to
  ``entries[k]``), i.e. gathered by the index after the build.
"""

import numpy as np

NAME = "python"


def _csr(counts):
    offsets = np.zeros(len(counts) + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return offsets


def build_two_layer(ix0, ix1, iy0, iy1, nx, ny):
    ix0, ix1, iy0, iy1 = ix0.tolist(), ix1.tolist(), iy0.tolist(), iy1.tolist()
    buckets = [[] for _ in range(nx * ny * 4)]
    for r in range(len(ix0)):
        i0 = ix0[r]
        if i0 < 0:
            continue
        j0 = iy0[r]
        for i in range(i0, ix1[r] + 1):
            xb = 2 if i > i0 else 0
            row = i * ny
            for j in range(j0, iy1[r] + 1):
                buckets[(row + j) * 4 + xb + (1 if j > j0 else 0)].append(r)
    offsets = _csr([len(b) for b in buckets])
    entries = np.fromiter((r for b in buckets for r in b), dtype=np.int64, count=int(offsets[-1]))
    return offsets, entries


def build_ig(ix0, ix1, iy0, iy1, nx, ny):
    ix0, ix1, iy0, iy1 = ix0.tolist(), ix1.tolist(), iy0.tolist(), iy1.tolist()
    tiles = [[] for _ in range(nx * ny)]
    for r in range(len(ix0)):
        if ix0[r] < 0:
            continue
        for i in range(ix0[r], ix1[r] + 1):
            row = i * ny
            for j in range(iy0[r], iy1[r] + 1):
                tiles[row + j].append(r)
    offsets = _csr([len(t) for t in tiles])
    entries = np.fromiter((r for t in tiles for r in t), dtype=np.int64, count=int(offsets[-1]))
    return offsets, entries


def query_two_layer(offsets, entries, exl, eyl, exu, eyu, qxl, qyl, qxu, qyu,
                    qix0, qix1, qiy0, qiy1, qself, ny, start, stop):
    offsets, entries = offsets.tolist(), entries.tolist()
    exl, eyl, exu, eyu = exl.tolist(), eyl.tolist(), exu.tolist(), eyu.tolist()
    counts = [0] * (stop - start)
    nbrs = []
    tests = tiles = 0
    for q in range(start, stop):
        i0 = int(qix0[q])
        if i0 < 0:
            continue
        j0, i1, j1, me = int(qiy0[q]), int(qix1[q]), int(qiy1[q]), int(qself[q])
        wxl, wyl, wxu, wyu = float(qxl[q]), float(qyl[q]), float(qxu[q]), float(qyu[q])
        found = 0
        for i in range(i0, i1 + 1):
            # relevant classes: drop "x-before" classes once w itself starts before the tile
            xmask = 2 if i > i0 else 0
            for j in range(j0, j1 + 1):
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
                        if exl[k] <= wxu and wxl <= exu[k] and eyl[k] <= wyu and wyl <= eyu[k]:
                            nbrs.append(r)
                            found += 1
        counts[q - start] = found
    return (np.asarray(counts, dtype=np.int64), np.asarray(nbrs, dtype=np.int64), tests, tiles)


def _locate(c, bounds, n, lo, width):
    i = int((c - lo) / width)
    i = min(max(i, 0), n - 1)
    while i > 0 and c < bounds[i]:
        i -= 1
    while i < n - 1 and c >= bounds[i + 1]:
        i += 1
    return i


def query_ig(offsets, entries, exl, eyl, exu, eyu, qxl, qyl, qxu, qyu,
             qix0, qix1, qiy0, qiy1, qself, xbounds, ybounds, start, stop):
    nx, ny = len(xbounds) - 1, len(ybounds) - 1
    xb, yb = xbounds.tolist(), ybounds.tolist()
    tw, th = (xb[-1] - xb[0]) / nx, (yb[-1] - yb[0]) / ny
    offsets, entries = offsets.tolist(), entries.tolist()
    exl, eyl, exu, eyu = exl.tolist(), eyl.tolist(), exu.tolist(), eyu.tolist()
    counts = [0] * (stop - start)
    nbrs = []
    tests = examined = tiles = 0
    for q in range(start, stop):
        i0 = int(qix0[q])
        if i0 < 0:
            continue
        j0, i1, j1, me = int(qiy0[q]), int(qix1[q]), int(qiy1[q]), int(qself[q])
        wxl, wyl, wxu, wyu = float(qxl[q]), float(qyl[q]), float(qxu[q]), float(qyu[q])
        found = 0
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                tiles += 1
                t = i * ny + j
                for k in range(offsets[t], offsets[t + 1]):
                    r = entries[k]
                    if r == me:
                        continue
                    tests += 1
                    if exl[k] <= wxu and wxl <= exu[k] and eyl[k] <= wyu and wyl <= eyu[k]:
                        # reference point: lower-left corner of the intersection
                        examined += 1
                        px = wxl if wxl > exl[k] else exl[k]
                        py = wyl if wyl > eyl[k] else eyl[k]
                        if _locate(px, xb, nx, xb[0], tw) == i and _locate(py, yb, ny, yb[0], th) == j:
                            nbrs.append(r)
                            found += 1
        counts[q - start] = found
    return (np.asarray(counts, dtype=np.int64), np.asarray(nbrs, dtype=np.int64), tests, examined, tiles)


def query_rtree(nxl, nyl, nxu, nyu, cstart, cend, is_leaf, entry_order,
                exl, eyl, exu, eyu, qxl, qyl, qxu, qyu, qself, start, stop):
    nxl, nyl, nxu, nyu = nxl.tolist(), nyl.tolist(), nxu.tolist(), nyu.tolist()
    cstart, cend, is_leaf = cstart.tolist(), cend.tolist(), is_leaf.tolist()
    entry_order = entry_order.tolist()
    exl, eyl, exu, eyu = exl.tolist(), eyl.tolist(), exu.tolist(), eyu.tolist()
    counts = [0] * (stop - start)
    nbrs = []
    tests = visited = 0
    if not nxl:
        return (np.asarray(counts, dtype=np.int64), np.empty(0, dtype=np.int64), 0, 0)
    for q in range(start, stop):
        me = int(qself[q])
        wxl, wyl, wxu, wyu = float(qxl[q]), float(qyl[q]), float(qxu[q]), float(qyu[q])
        found = 0
        tests += 1
        if not (nxl[0] <= wxu and wxl <= nxu[0] and nyl[0] <= wyu and wyl <= nyu[0]):
            continue
        stack = [0]
        while stack:
            node = stack.pop()
            visited += 1
            if is_leaf[node]:
                for k in range(cstart[node], cend[node]):
                    r = entry_order[k]
                    if r == me:
                        continue
                    tests += 1
                    if exl[k] <= wxu and wxl <= exu[k] and eyl[k] <= wyu and wyl <= eyu[k]:
                        nbrs.append(r)
                        found += 1
            else:
                for ch in range(cstart[node], cend[node]):
                    tests += 1
                    if nxl[ch] <= wxu and wxl <= nxu[ch] and nyl[ch] <= wyu and wyl <= nyu[ch]:
                        stack.append(ch)
        counts[q - start] = found
    return (np.asarray(counts, dtype=np.int64), np.asarray(nbrs, dtype=np.int64), tests, visited)


def brute_force_pairs(xl, yl, xu, yu):
    xl, yl, xu, yu = xl.tolist(), yl.tolist(), xu.tolist(), yu.tolist()
    n = len(xl)
    src, dst = [], []
    for a in range(n):
        axl, ayl, axu, ayu = xl[a], yl[a], xu[a], yu[a]
        for b in range(a + 1, n):
            if xl[b] <= axu and axl <= xu[b] and yl[b] <= ayu and ayl <= yu[b]:
                src.append(a)
                dst.append(b)
    return (np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64), n * (n - 1) // 2)


def component_roots(n, src, dst):
    """Union-find over ``n`` nodes; returns the root of every node."""
    parent = list(range(n))

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    for a, b in zip(src.tolist(), dst.tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    return np.asarray([find(a) for a in range(n)], dtype=np.int64)
