import bisect
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from labelpart.geometry import Rect, RectArrays, clamp_rect, rect_intersects
from labelpart.grid_index import (
    GridConfig,
    SecondaryClass as S,
    TileId,
    build_grid,
    classify,
    locate,
    relevant_classes,
    tile_overlaps,
    tile_range,
)

from instances import check_partition_property, random_instance

R = Rect.from_bounds
G10 = GridConfig.square(100.0, 10)


def scan_tiles(r, cfg):
    """Every tile the rect overlaps, by testing each tile."""
    return [t for t in cfg.tiles() if tile_overlaps(r, t, cfg)]


@pytest.mark.parametrize("r, lo, hi", [
    (R(12, 12, 18, 18), (1, 1), (1, 1)),
    (R(8, 8, 12, 12), (0, 0), (1, 1)),
    (R(10, 0, 20, 5), (1, 0), (2, 0)),
    (R(0, 0, 100, 100), (0, 0), (9, 9)),
    (R(100, 100, 100, 100), (9, 9), (9, 9)),
    (R(-5, 95, 3, 130), (0, 9), (0, 9)),
])
def test_tile_range_examples(r, lo, hi):
    got = tile_range(r, G10)
    assert got == (TileId(*lo), TileId(*hi))
    covered = scan_tiles(r, G10)
    assert (min(covered), max(covered)) == got
    assert len(covered) == (hi[0] - lo[0] + 1) * (hi[1] - lo[1] + 1)


def test_tile_range_outside_domain():
    assert tile_range(R(101, 0, 120, 10), G10) is None
    assert tile_range(R(-10, -10, -0.001, 5), G10) is None


def test_grid_config_validation():
    with pytest.raises(ValueError):
        GridConfig.square(100.0, 0)
    with pytest.raises(ValueError):
        GridConfig(R(0, 0, 0, 10), 4, 4)
    cfg = GridConfig(R(0, 0, 30, 10), 3, 2)
    assert (cfg.tile_width, cfg.tile_height, cfg.n_tiles) == (10.0, 5.0, 6)
    assert cfg.x_bounds[-1] == 30.0 and cfg.y_bounds[-1] == 10.0


@pytest.mark.parametrize("r, expected", [
    (R(12, 13, 15, 18), S.A),
    (R(12, 5, 15, 12), S.B),
    (R(5, 12, 12, 15), S.C),
    (R(5, 5, 12, 12), S.D),
])
def test_classify_examples(r, expected):
    assert classify(r, TileId(1, 1), G10) is expected


def test_classify_requires_overlap():
    with pytest.raises(ValueError):
        classify(R(30, 30, 35, 35), TileId(1, 1), G10)
    # the upper edge of a half-open tile is not part of it
    with pytest.raises(ValueError):
        classify(R(20, 12, 25, 15), TileId(1, 1), G10)


def test_relevant_classes_examples():
    t = TileId(1, 1)
    assert relevant_classes(R(12, 12, 18, 18), t, G10) == {S.A, S.B, S.C, S.D}
    assert relevant_classes(R(5, 12, 18, 18), t, G10) == {S.A, S.B}
    assert relevant_classes(R(12, 5, 18, 18), t, G10) == {S.A, S.C}
    assert relevant_classes(R(5, 5, 18, 18), t, G10) == {S.A}


def test_build_grid_small_cases():
    idx = build_grid([("a", R(12, 12, 18, 18))], G10)
    assert idx.class_counts().sum() == 1
    assert idx.bucket(TileId(1, 1), S.A) == [("a", R(12, 12, 18, 18))]

    idx = build_grid([("b", R(15, 15, 25, 25))], G10)
    assert idx.class_counts().sum() == 4
    assert idx.bucket(TileId(1, 1), S.A)[0][0] == "b"
    assert idx.bucket(TileId(1, 2), S.B)[0][0] == "b"
    assert idx.bucket(TileId(2, 1), S.C)[0][0] == "b"
    assert idx.bucket(TileId(2, 2), S.D)[0][0] == "b"

    empty = build_grid([], G10)
    assert empty.class_counts().sum() == 0
    assert len(empty) == 0


def test_grid_index_is_read_only():
    idx = build_grid([("a", R(12, 12, 18, 18))], G10)
    with pytest.raises(ValueError):
        idx.entries[0] = 5


def test_class_counts_match_scalar_classification(kernels):
    rects, cfg = random_instance(5, 1000, 16)
    idx = build_grid(rects, cfg, kernels)
    expected = np.zeros((16, 16, 4), dtype=np.int64)
    for _, r in rects.to_pairs():
        c = clamp_rect(r, cfg.domain)
        if c is None:
            continue
        for t in scan_tiles(c, cfg):
            expected[t.ix, t.iy, classify(r, t, cfg)] += 1
    assert np.array_equal(idx.class_counts(), expected)


@pytest.mark.parametrize("seed", range(4))
def test_partition_property(kernels, seed):
    rects, cfg = random_instance(seed, 400, None, outside=True)
    check_partition_property(build_grid(rects, cfg, kernels), rects, cfg)


@pytest.mark.parametrize("seed", range(3))
def test_coverage_without_duplication(seed):
    rects, cfg = random_instance(100 + seed, 150, 8)
    idx = build_grid(rects, cfg)
    pairs = rects.to_pairs()
    for w_label, w in pairs:
        tr = tile_range(w, cfg)
        if tr is None:
            continue
        seen = {}
        for ix in range(tr[0].ix, tr[1].ix + 1):
            for iy in range(tr[0].iy, tr[1].iy + 1):
                t = TileId(ix, iy)
                for c in relevant_classes(w, t, cfg):
                    for lab, _ in idx.bucket(t, c):
                        seen[lab] = seen.get(lab, 0) + 1
        for lab, r in pairs:
            if rect_intersects(w, r) and clamp_rect(r, cfg.domain) is not None:
                assert seen.get(lab) == 1, (w_label, lab, seen.get(lab))


def test_build_is_deterministic(kernels):
    rects, cfg = random_instance(9, 500, 20)
    a, b = build_grid(rects, cfg, kernels), build_grid(rects, cfg, kernels)
    assert np.array_equal(a.offsets, b.offsets) and np.array_equal(a.entries, b.entries)


# -- locate ------------------------------------------------------------------


@settings(max_examples=200)
@given(
    st.floats(-1e6, 1e6), st.floats(1e-3, 1e6), st.integers(1, 500),
    st.lists(st.floats(0, 1), min_size=1, max_size=30),
)
def test_locate_matches_bisect(lo, side, n, fracs):
    cfg = GridConfig(R(lo, lo, lo + side, lo + side), n, n)
    b = cfg.x_bounds
    coords = np.array([lo + f * side for f in fracs] + b.tolist())
    coords = np.clip(coords, b[0], b[-1])
    ref = [min(max(bisect.bisect_right(b.tolist(), c) - 1, 0), n - 1) for c in coords]
    assert locate(coords, b).tolist() == ref


def test_boundaries_are_exact_on_awkward_widths():
    for side, n in itertools.product((333.3, 0.1, 7.0, 2000.0), (3, 7, 100, 128)):
        cfg = GridConfig.square(side, n, origin=-13.7)
        b = cfg.x_bounds
        assert locate(b[:-1], b).tolist() == list(range(n))
        assert locate(b[-1:], b).tolist() == [n - 1]
