"""Reference self-joins: brute force, STR R-tree, and inclusion-checking grid."""

from __future__ import annotations

import math

import numpy as np

from labelpart import _backend
from labelpart.geometry import RectArrays, as_rect_arrays
from labelpart.grid_index import GridConfig, _GridBase
from labelpart.two_layer_join import AdjacencyMap, CostCounters


def brute_force_join(M, counters: CostCounters | None = None, kernels=None) -> AdjacencyMap:
    """Exact adjacency by testing every unordered pair once."""
    rects = as_rect_arrays(M)
    k = kernels or _backend.kernels
    src, dst, tests = k.brute_force_pairs(rects.xl, rects.yl, rects.xu, rects.yu)
    if counters is not None:
        counters += CostCounters(intersection_tests=tests, candidates_examined=tests)
    return AdjacencyMap.from_pairs(rects.labels, src, dst)


# ---------------------------------------------------------------------------
# R-tree


def _str_order(cx: np.ndarray, cy: np.ndarray, fanout: int) -> np.ndarray:
    """Sort-tile-recursive ordering: x-slabs of ``S * fanout`` items, each sorted by y."""
    m = len(cx)
    n_groups = math.ceil(m / fanout)
    slab = math.ceil(math.sqrt(n_groups)) * fanout
    by_x = np.argsort(cx, kind="stable")
    slab_id = np.arange(m) // slab
    return by_x[np.lexsort((cy[by_x], slab_id))]


class RTreeIndex:
    """Static R-tree bulk loaded with sort-tile-recursive packing.

    Nodes are flattened root-first.  A leaf's children are slots
    ``entry_order[cstart:cend]`` (rect positions); an internal node's children
    are node ids ``cstart..cend-1``.
    """

    def __init__(self, source: RectArrays, fanout: int = 16, kernels=None):
        if fanout < 2:
            raise ValueError("fanout must be at least 2")
        self.rects = source
        self.fanout = fanout
        self.kernels = kernels or _backend.kernels
        self._build()

    def __len__(self):
        return len(self.rects)

    @property
    def labels(self):
        return self.rects.labels

    def _build(self):
        r, f = self.rects, self.fanout
        n = len(r)
        empty_f = np.empty(0)
        empty_i = np.empty(0, dtype=np.int64)
        if n == 0:
            self.exl = self.eyl = self.exu = self.eyu = empty_f
            self.entry_order = empty_i
            self.nxl = self.nyl = self.nxu = self.nyu = empty_f
            self.cstart = self.cend = empty_i
            self.is_leaf = np.empty(0, dtype=np.uint8)
            self.height = 0
            return

        order = _str_order(0.5 * (r.xl + r.xu), 0.5 * (r.yl + r.yu), f)
        self.entry_order = order.astype(np.int64)
        boxes = (r.xl[order], r.yl[order], r.xu[order], r.yu[order])
        self.exl, self.eyl, self.exu, self.eyu = boxes
        # levels[k] = (xl, yl, xu, yu, cstart, cend); children index into the level below
        levels = []
        m = n
        while True:
            starts = np.arange(0, m, f, dtype=np.int64)
            ends = np.minimum(starts + f, m)
            node = (
                np.minimum.reduceat(boxes[0], starts),
                np.minimum.reduceat(boxes[1], starts),
                np.maximum.reduceat(boxes[2], starts),
                np.maximum.reduceat(boxes[3], starts),
            )
            if len(starts) == 1:
                levels.append((*node, starts, ends))
                break
            # reorder this level's nodes by STR before grouping them into parents
            perm = _str_order(0.5 * (node[0] + node[2]), 0.5 * (node[1] + node[3]), f)
            levels.append(tuple(a[perm] for a in (*node, starts, ends)))
            boxes = tuple(a[perm] for a in node)
            m = len(starts)

        # flatten root-first; shift child ids of internal levels to global ids
        levels.reverse()
        sizes = [len(lv[0]) for lv in levels]
        base = np.concatenate([[0], np.cumsum(sizes)])
        cols = [[] for _ in range(6)]
        for depth, lv in enumerate(levels):
            leaf = depth == len(levels) - 1
            shift = 0 if leaf else base[depth + 1]
            for c in range(4):
                cols[c].append(lv[c])
            cols[4].append(lv[4] + shift)
            cols[5].append(lv[5] + shift)
        self.nxl, self.nyl, self.nxu, self.nyu = (np.ascontiguousarray(np.concatenate(c)) for c in cols[:4])
        self.cstart = np.concatenate(cols[4]).astype(np.int64)
        self.cend = np.concatenate(cols[5]).astype(np.int64)
        self.is_leaf = np.zeros(base[-1], dtype=np.uint8)
        self.is_leaf[base[-2]:] = 1
        self.height = len(levels)

    def query_block(self, q: RectArrays, qself: np.ndarray, threads: int = 1):
        k = self.kernels

        def run(start, stop):
            return k.query_rtree(
                self.nxl, self.nyl, self.nxu, self.nyu, self.cstart, self.cend,
                self.is_leaf, self.entry_order, self.exl, self.eyl, self.exu, self.eyu,
                q.xl, q.yl, q.xu, q.yu, qself, start, stop,
            )

        return _backend.run_queries(run, len(q), threads)


def build_rtree(M, fanout: int = 16, kernels=None) -> RTreeIndex:
    return RTreeIndex(as_rect_arrays(M), fanout, kernels)


def rtree_self_join(index: RTreeIndex, counters: CostCounters | None = None, threads: int = 1) -> AdjacencyMap:
    n = len(index)
    counts, nbrs, tests, visited = index.query_block(index.rects, np.arange(n, dtype=np.int64), threads)
    if counters is not None:
        counters += CostCounters(tests, 0, tests)
    return AdjacencyMap.from_counts(index.labels, counts, nbrs)


def rtree_join(M, counters: CostCounters | None = None, fanout: int = 16, threads: int = 1, kernels=None) -> AdjacencyMap:
    """Bulk-load an R-tree over ``M`` and range-query it with every gate."""
    return rtree_self_join(build_rtree(M, fanout, kernels), counters, threads)


# ---------------------------------------------------------------------------
# Inclusion-checking grid


class IGIndex(_GridBase):
    """Grid storing every rect in each tile it meets, one flat list per tile."""

    def __init__(self, config: GridConfig, source: RectArrays, kernels=None):
        super().__init__(config, source, kernels)
        r = self.ranges
        self.offsets, self.entries = self.kernels.build_ig(
            r.ix0, r.ix1, r.iy0, r.iy1, config.tiles_x, config.tiles_y
        )
        self._gather()

    def tile_positions(self, t) -> np.ndarray:
        i = self.config.tile_linear(t)
        return self.entries[self.offsets[i]:self.offsets[i + 1]]

    def tile_entries(self, t):
        return [self._entry(int(p)) for p in self.tile_positions(t)]


def build_ig(M, cfg: GridConfig, kernels=None) -> IGIndex:
    return IGIndex(cfg, as_rect_arrays(M), kernels)


def ig_self_join(index: IGIndex, counters: CostCounters | None = None, threads: int = 1) -> AdjacencyMap:
    """Scan all tiles of each gate; keep a hit only in the tile owning the
    lower-left corner of the two rects' intersection."""
    k, r, cfg = index.kernels, index.rects, index.config
    qr = index.ranges
    qself = np.arange(len(index), dtype=np.int64)

    def run(start, stop):
        return k.query_ig(
            index.offsets, index.entries, index.exl, index.eyl, index.exu, index.eyu,
            r.xl, r.yl, r.xu, r.yu, qr.ix0, qr.ix1, qr.iy0, qr.iy1,
            qself, cfg.x_bounds, cfg.y_bounds, start, stop,
        )

    counts, nbrs, tests, examined, tiles = _backend.run_queries(run, len(index), threads)
    if counters is not None:
        counters += CostCounters(tests, tiles, examined)
    return AdjacencyMap.from_counts(index.labels, counts, nbrs)


def ig_join(M, cfg: GridConfig, counters: CostCounters | None = None, threads: int = 1, kernels=None) -> AdjacencyMap:
    return ig_self_join(build_ig(M, cfg, kernels), counters, threads)
