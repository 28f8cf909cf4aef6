"""Duplicate-free self-join over the secondary-class grid.

Each gate is used as a query window against the grid holding every gate.
Per tile the query only scans the classes it cannot have met in an earlier
tile, so every intersecting gate is found exactly once per query without any
deduplication step.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, fields
from typing import Iterable

import numpy as np

from labelpart import _backend
from labelpart.geometry import Label, Rect, RectArrays, as_rect_arrays
from labelpart.grid_index import GridConfig, GridIndex, TileRanges, clamp_arrays, tile_ranges


class DuplicateResultError(AssertionError):
    """A query reported the same candidate more than once."""


@dataclass
class CostCounters:
    intersection_tests: int = 0
    tiles_visited: int = 0
    candidates_examined: int = 0

    def __iadd__(self, other: "CostCounters") -> "CostCounters":
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class AdjacencyMap(Mapping):
    """Per-label set of intersecting labels, stored as CSR over positions.

    ``labels[p]`` is the label at position ``p``; its neighbours are the
    positions ``neighbors[offsets[p]:offsets[p + 1]]`` in discovery order.
    Reading it as a mapping gives ``label -> frozenset(labels)``.
    """

    def __init__(self, labels: list, offsets: np.ndarray, neighbors: np.ndarray):
        self.labels = list(labels)
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.neighbors = np.asarray(neighbors, dtype=np.int64)
        if self.offsets.shape != (len(self.labels) + 1,):
            raise ValueError("offsets length must be len(labels) + 1")
        self._pos = None
        self._canon = None

    # -- construction -------------------------------------------------------

    @classmethod
    def from_counts(cls, labels, counts, neighbors) -> "AdjacencyMap":
        offsets = np.zeros(len(labels) + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return cls(labels, offsets, neighbors)

    @classmethod
    def from_pairs(cls, labels, src, dst) -> "AdjacencyMap":
        """Symmetric map from undirected position pairs (each pair once)."""
        a = np.concatenate([src, dst]).astype(np.int64)
        b = np.concatenate([dst, src]).astype(np.int64)
        order = np.argsort(a, kind="stable")
        counts = np.bincount(a, minlength=len(labels))
        return cls.from_counts(labels, counts, b[order])

    @classmethod
    def from_mapping(cls, mapping: Mapping[Label, Iterable[Label]], all_labels=None) -> "AdjacencyMap":
        labels = list(mapping)
        if all_labels is not None:
            known = set(labels)
            labels += [lab for lab in all_labels if lab not in known]
        pos = {lab: i for i, lab in enumerate(labels)}
        counts, nbrs = [], []
        for lab in labels:
            row = list(mapping.get(lab, ()))
            counts.append(len(row))
            try:
                nbrs.extend(pos[r] for r in row)
            except KeyError as exc:
                raise ValueError(f"neighbour {exc.args[0]!r} of {lab!r} is not a label") from None
        return cls.from_counts(labels, np.asarray(counts, dtype=np.int64), np.asarray(nbrs, dtype=np.int64))

    # -- mapping protocol ---------------------------------------------------

    def position(self, label: Label) -> int:
        if self._pos is None:
            self._pos = {lab: i for i, lab in enumerate(self.labels)}
        return self._pos[label]

    def row(self, p: int) -> np.ndarray:
        return self.neighbors[self.offsets[p]:self.offsets[p + 1]]

    def __getitem__(self, label: Label) -> frozenset:
        return frozenset(self.labels[int(q)] for q in self.row(self.position(label)))

    def __iter__(self):
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"AdjacencyMap({len(self)} labels, {self.n_directed_edges} directed edges)"

    @property
    def n_directed_edges(self) -> int:
        return int(self.offsets[-1])

    def to_dict(self) -> dict[Label, set]:
        return {lab: set(self[lab]) for lab in self.labels}

    # -- structure ----------------------------------------------------------

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        src = np.repeat(np.arange(len(self.labels), dtype=np.int64), np.diff(self.offsets))
        return src, self.neighbors

    def canonical(self) -> np.ndarray:
        """Neighbour positions sorted within each row."""
        if self._canon is None:
            src, dst = self.edge_arrays()
            self._canon = dst[np.lexsort((dst, src))]
        return self._canon

    def has_duplicates(self) -> bool:
        src, _ = self.edge_arrays()
        c = self.canonical()
        return bool(np.any((c[1:] == c[:-1]) & (src[1:] == src[:-1])))

    def is_irreflexive(self) -> bool:
        src, dst = self.edge_arrays()
        return not np.any(src == dst)

    def is_symmetric(self) -> bool:
        src, dst = self.edge_arrays()
        n = len(self.labels) + 1
        fwd = np.sort(src * n + dst)
        bwd = np.sort(dst * n + src)
        return bool(np.array_equal(fwd, bwd))

    def undirected_edges(self) -> tuple[np.ndarray, np.ndarray]:
        src, dst = self.edge_arrays()
        keep = src < dst
        return src[keep], dst[keep]

    def _aligned(self, other: "AdjacencyMap") -> "AdjacencyMap | None":
        if other.labels == self.labels:
            return other
        if set(other.labels) != set(self.labels) or len(other.labels) != len(self.labels):
            return None
        perm = np.asarray([self.position(lab) for lab in other.labels], dtype=np.int64)
        src, dst = other.edge_arrays()
        a, b = perm[src], perm[dst]
        order = np.argsort(a, kind="stable")
        return AdjacencyMap.from_counts(self.labels, np.bincount(a, minlength=len(self.labels)), b[order])

    def __eq__(self, other) -> bool:
        if not isinstance(other, AdjacencyMap):
            if isinstance(other, Mapping):
                return self.to_dict() == {k: set(v) for k, v in other.items()}
            return NotImplemented
        o = self._aligned(other)
        return (
            o is not None
            and np.array_equal(self.offsets, o.offsets)
            and np.array_equal(self.canonical(), o.canonical())
        )

    __hash__ = None

    def diff(self, other: "AdjacencyMap", limit: int = 10) -> str:
        """Human-readable list of labels whose neighbour sets differ."""
        o = self._aligned(other)
        if o is None:
            return f"label sets differ: {len(self)} vs {len(other)} labels"
        lines = []
        for p, lab in enumerate(self.labels):
            mine = set(self.row(p).tolist())
            theirs = set(o.row(p).tolist())
            if mine != theirs:
                extra = sorted(self.labels[q] for q in mine - theirs)
                missing = sorted(self.labels[q] for q in theirs - mine)
                lines.append(f"{lab!r}: only-left={extra} only-right={missing}")
                if len(lines) >= limit:
                    lines.append("...")
                    break
        return "\n".join(lines) or "identical"


def check_no_duplicates(adj: AdjacencyMap, method: str = "two-layer") -> None:
    if adj.has_duplicates():
        src, _ = adj.edge_arrays()
        c = adj.canonical()
        bad = np.flatnonzero((c[1:] == c[:-1]) & (src[1:] == src[:-1]))[0]
        raise DuplicateResultError(
            f"{method} query for {adj.labels[int(src[bad])]!r} reported "
            f"{adj.labels[int(c[bad])]!r} more than once"
        )


# ---------------------------------------------------------------------------


def _query_block(index: GridIndex, q: RectArrays, qr: TileRanges, qself: np.ndarray, threads: int):
    k, ny = index.kernels, index.config.tiles_y

    def run(start, stop):
        return k.query_two_layer(
            index.offsets, index.entries, index.exl, index.eyl, index.exu, index.eyu,
            q.xl, q.yl, q.xu, q.yu, qr.ix0, qr.ix1, qr.iy0, qr.iy1,
            qself, ny, start, stop,
        )

    return _backend.run_queries(run, len(q), threads)


def query(index: GridIndex, w: tuple[Label, Rect], counters: CostCounters | None = None) -> set:
    """Labels of all indexed gates intersecting ``w``'s rect, excluding ``w`` itself."""
    label, rect = w
    q, inside = clamp_arrays(RectArrays.from_pairs([w]), index.config)
    qr = tile_ranges(q, inside, index.config)
    try:
        me = index.rects.position(label)
    except KeyError:
        me = -1
    counts, nbrs, tests, tiles = _query_block(index, q, qr, np.asarray([me], dtype=np.int64), 1)
    found = [index.labels[int(p)] for p in nbrs]
    if len(set(found)) != len(found):
        raise DuplicateResultError(f"query {label!r} reported a candidate twice: {found}")
    if counters is not None:
        counters += CostCounters(tests, tiles, tests)
    return set(found)


def self_join(
    index: GridIndex,
    counters: CostCounters | None = None,
    threads: int = 1,
    check_duplicates: bool = False,
) -> AdjacencyMap:
    """Query every indexed gate against the index."""
    n = len(index)
    qself = np.arange(n, dtype=np.int64)
    counts, nbrs, tests, tiles = _query_block(index, index.rects, index.ranges, qself, threads)
    adj = AdjacencyMap.from_counts(index.labels, counts, nbrs)
    if check_duplicates:
        check_no_duplicates(adj)
    if counters is not None:
        counters += CostCounters(tests, tiles, tests)
    return adj


def two_layer_label_partition(
    cfg: GridConfig,
    M,
    *,
    threads: int = 1,
    check_duplicates: bool = False,
    kernels=None,
) -> tuple[AdjacencyMap, CostCounters]:
    """Index ``M`` and return its self-join adjacency plus the cost counters."""
    counters = CostCounters()
    index = GridIndex(cfg, as_rect_arrays(M), kernels)
    adj = self_join(index, counters, threads=threads, check_duplicates=check_duplicates)
    return adj, counters
