"""Uniform tile grid with per-tile secondary classes.

Every rectangle is stored in each tile it intersects, and inside that tile it
is put in one of four classes by whether it starts inside the tile or before
it on each axis:

====  ======================  ======================
cls   x                       y
====  ======================  ======================
A     starts in tile          starts in tile
B     starts in tile          starts before tile
C     starts before tile      starts in tile
D     starts before tile      starts before tile
====  ======================  ======================

Tiles are half-open ``[lo, hi)`` except that the last tile on each axis also
owns the domain's upper edge, so every point of the domain has exactly one
owning tile.  Rectangles are closed.
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from labelpart import _backend
from labelpart.geometry import Rect, RectArrays, Label, as_rect_arrays, clamp_rect


class SecondaryClass(enum.IntEnum):
    A = 0
    B = 1
    C = 2
    D = 3

    @property
    def starts_before_x(self) -> bool:
        return bool(self & 2)

    @property
    def starts_before_y(self) -> bool:
        return bool(self & 1)


ALL_CLASSES = frozenset(SecondaryClass)


class TileId(NamedTuple):
    ix: int
    iy: int


@dataclass(frozen=True)
class GridConfig:
    domain: Rect
    tiles_x: int = 100
    tiles_y: int = 100

    def __post_init__(self):
        if self.tiles_x < 1 or self.tiles_y < 1:
            raise ValueError("tile counts must be positive")
        if not (self.domain.x.length > 0 and self.domain.y.length > 0):
            raise ValueError("grid domain must have positive extent on both axes")
        if not (self.tile_width > 0 and self.tile_height > 0):
            raise ValueError("tile size underflows to zero")

    @classmethod
    def square(cls, side: float, tiles: int = 100, origin: float = 0.0) -> "GridConfig":
        return cls(Rect.from_bounds(origin, origin, origin + side, origin + side), tiles, tiles)

    @property
    def tile_width(self) -> float:
        return self.domain.x.length / self.tiles_x

    @property
    def tile_height(self) -> float:
        return self.domain.y.length / self.tiles_y

    @property
    def n_tiles(self) -> int:
        return self.tiles_x * self.tiles_y

    # Canonical tile boundaries.  Every tile computation goes through these so
    # that index arithmetic and coordinate comparisons can never disagree.
    @cached_property
    def x_bounds(self) -> np.ndarray:
        return _bounds(self.domain.x_l, self.domain.x_u, self.tiles_x)

    @cached_property
    def y_bounds(self) -> np.ndarray:
        return _bounds(self.domain.y_l, self.domain.y_u, self.tiles_y)

    @cached_property
    def _xb_list(self):
        return self.x_bounds.tolist()

    @cached_property
    def _yb_list(self):
        return self.y_bounds.tolist()

    def locate_x(self, c: float) -> int:
        return min(max(bisect.bisect_right(self._xb_list, c) - 1, 0), self.tiles_x - 1)

    def locate_y(self, c: float) -> int:
        return min(max(bisect.bisect_right(self._yb_list, c) - 1, 0), self.tiles_y - 1)

    def tile_extent(self, t: TileId) -> Rect:
        """Closed hull of the tile; the half-open upper edge is implied."""
        return Rect.from_bounds(
            self._xb_list[t.ix], self._yb_list[t.iy], self._xb_list[t.ix + 1], self._yb_list[t.iy + 1]
        )

    def tile_linear(self, t: TileId) -> int:
        return t.ix * self.tiles_y + t.iy

    def tiles(self):
        for ix in range(self.tiles_x):
            for iy in range(self.tiles_y):
                yield TileId(ix, iy)


def _bounds(lo: float, hi: float, n: int) -> np.ndarray:
    b = lo + np.arange(n + 1, dtype=np.float64) * ((hi - lo) / n)
    b[0], b[-1] = lo, hi
    return b


def tile_overlaps(r: Rect, t: TileId, cfg: GridConfig) -> bool:
    """Closed ``r`` against the tile's half-open extent."""
    ext = cfg.tile_extent(t)
    last_x = t.ix == cfg.tiles_x - 1
    last_y = t.iy == cfg.tiles_y - 1
    x_ok = r.x_u >= ext.x_l and (r.x_l < ext.x_u or (last_x and r.x_l <= ext.x_u))
    y_ok = r.y_u >= ext.y_l and (r.y_l < ext.y_u or (last_y and r.y_l <= ext.y_u))
    return x_ok and y_ok


def tile_range(r: Rect, cfg: GridConfig) -> tuple[TileId, TileId] | None:
    """Inclusive range of tiles intersecting ``r``; ``None`` if ``r`` misses the domain."""
    c = clamp_rect(r, cfg.domain)
    if c is None:
        return None
    return (
        TileId(cfg.locate_x(c.x_l), cfg.locate_y(c.y_l)),
        TileId(cfg.locate_x(c.x_u), cfg.locate_y(c.y_u)),
    )


def classify(r: Rect, t: TileId, cfg: GridConfig) -> SecondaryClass:
    c = clamp_rect(r, cfg.domain)
    if c is None or not tile_overlaps(c, t, cfg):
        raise ValueError(f"rect {r.bounds} does not intersect tile {tuple(t)}")
    ext = cfg.tile_extent(t)
    before_x = ext.x_l > c.x_l
    before_y = ext.y_l > c.y_l
    return SecondaryClass(2 * before_x + before_y)


def relevant_classes(w: Rect, t: TileId, cfg: GridConfig) -> frozenset[SecondaryClass]:
    """Classes of tile ``t`` that a query ``w`` must scan.

    Once ``w`` starts before ``t`` on an axis, every class that also starts
    before ``t`` on that axis was already met in the preceding tile.
    """
    c = clamp_rect(w, cfg.domain)
    if c is None:
        return frozenset()
    ext = cfg.tile_extent(t)
    before_x = c.x_l < ext.x_l
    before_y = c.y_l < ext.y_l
    return frozenset(
        k for k in SecondaryClass
        if not (before_x and k.starts_before_x) and not (before_y and k.starts_before_y)
    )


# ---------------------------------------------------------------------------
# Bulk construction


@dataclass
class TileRanges:
    """Per-rect inclusive tile ranges; ``ix0 == -1`` marks a rect outside the domain."""

    ix0: np.ndarray
    ix1: np.ndarray
    iy0: np.ndarray
    iy1: np.ndarray

    @property
    def inside(self) -> np.ndarray:
        return self.ix0 >= 0


def clamp_arrays(rects: RectArrays, cfg: GridConfig) -> tuple[RectArrays, np.ndarray]:
    """Clamp every rect to the domain; also return the in-domain mask."""
    d = cfg.domain
    inside = (rects.xu >= d.x_l) & (rects.xl <= d.x_u) & (rects.yu >= d.y_l) & (rects.yl <= d.y_u)
    clamped = RectArrays(
        rects.labels,
        np.clip(rects.xl, d.x_l, d.x_u),
        np.clip(rects.yl, d.y_l, d.y_u),
        np.clip(rects.xu, d.x_l, d.x_u),
        np.clip(rects.yu, d.y_l, d.y_u),
    )
    return clamped, inside


def locate(c: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    """Owning tile index of each coordinate against canonical ``bounds``.

    Division gives the index up to one tile of rounding error; one
    comparison step against the boundaries makes it exact.
    """
    n = len(bounds) - 1
    width = (bounds[-1] - bounds[0]) / n
    i = np.clip(((c - bounds[0]) / width).astype(np.int64), 0, n - 1)
    i -= (i > 0) & (c < bounds[i])
    i += (i < n - 1) & (c >= bounds[np.minimum(i + 1, n)])
    return i


def tile_ranges(clamped: RectArrays, inside: np.ndarray, cfg: GridConfig) -> TileRanges:
    ix0 = locate(clamped.xl, cfg.x_bounds)
    ix0[~inside] = -1
    return TileRanges(
        ix0,
        locate(clamped.xu, cfg.x_bounds),
        locate(clamped.yl, cfg.y_bounds),
        locate(clamped.yu, cfg.y_bounds),
    )


class _GridBase:
    """Clamped rects and tile ranges shared by the grid-based indexes."""

    def __init__(self, config: GridConfig, source: RectArrays, kernels=None):
        self.config = config
        self.source = source
        self.kernels = kernels or _backend.kernels
        self.rects, self.inside = clamp_arrays(source, config)
        self.ranges = tile_ranges(self.rects, self.inside, config)

    def __len__(self):
        return len(self.rects)

    @property
    def labels(self) -> list:
        return self.rects.labels

    def _entry(self, pos: int) -> tuple[Label, Rect]:
        return (self.rects.labels[pos], self.rects.rect(pos))

    def _gather(self):
        # coordinates copied into bucket order so scans read memory sequentially
        r, e = self.rects, self.entries
        self.exl, self.eyl, self.exu, self.eyu = r.xl[e], r.yl[e], r.xu[e], r.yu[e]


class GridIndex(_GridBase):
    """Tile grid whose tiles each hold four ordered class buckets.

    Buckets are stored CSR-style: bucket ``b = tile_linear * 4 + cls`` owns
    ``entries[offsets[b]:offsets[b + 1]]`` (rect positions, insertion order).
    Immutable after construction.
    """

    def __init__(self, config: GridConfig, source: RectArrays, kernels=None):
        super().__init__(config, source, kernels)
        r = self.ranges
        self.offsets, self.entries = self.kernels.build_two_layer(
            r.ix0, r.ix1, r.iy0, r.iy1, config.tiles_x, config.tiles_y
        )
        self._gather()
        for a in (self.offsets, self.entries, self.exl, self.eyl, self.exu, self.eyu):
            a.setflags(write=False)

    def bucket_positions(self, t: TileId, cls: SecondaryClass) -> np.ndarray:
        b = self.config.tile_linear(t) * 4 + int(cls)
        return self.entries[self.offsets[b]:self.offsets[b + 1]]

    def bucket(self, t: TileId, cls: SecondaryClass) -> list[tuple[Label, Rect]]:
        return [self._entry(int(p)) for p in self.bucket_positions(t, cls)]

    def class_counts(self) -> np.ndarray:
        """Array of shape ``(tiles_x, tiles_y, 4)`` with bucket sizes."""
        cfg = self.config
        return np.diff(self.offsets).reshape(cfg.tiles_x, cfg.tiles_y, 4)


def build_grid(rects, cfg: GridConfig, kernels=None) -> GridIndex:
    """Index ``rects`` (pairs, mapping, or :class:`RectArrays`) into ``cfg``'s grid."""
    return GridIndex(cfg, as_rect_arrays(rects), kernels)
