"""Compiled and pure-Python kernels must agree bit for bit."""

import numpy as np
import pytest

from labelpart import _backend
from labelpart.baselines import build_ig, build_rtree, ig_self_join, rtree_self_join
from labelpart.grid_index import build_grid
from labelpart.label_grouping import _components
from labelpart.two_layer_join import CostCounters, self_join

from instances import random_instance

needs_both = pytest.mark.skipif(len(_backend.BACKENDS) < 2, reason="compiled extension not built")
PY = _backend.get_kernels("python")


def test_python_backend_is_always_available():
    assert PY.NAME == "python"
    with pytest.raises(ValueError):
        _backend.get_kernels("fortran")


@needs_both
@pytest.mark.parametrize("seed", range(3))
def test_index_builds_identical(seed):
    cy = _backend.get_kernels("cython")
    rects, cfg = random_instance(seed, 800, None, outside=True)
    for build in (build_grid, build_ig):
        a, b = build(rects, cfg, PY), build(rects, cfg, cy)
        assert np.array_equal(a.offsets, b.offsets)
        assert np.array_equal(a.entries, b.entries)


@needs_both
@pytest.mark.parametrize("seed", range(3))
def test_joins_identical_including_counters(seed):
    cy = _backend.get_kernels("cython")
    rects, cfg = random_instance(50 + seed, 800, None)
    for build, join in ((build_grid, self_join), (build_ig, ig_self_join)):
        out = []
        for k in (PY, cy):
            c = CostCounters()
            adj = join(build(rects, cfg, k), c)
            out.append((adj.offsets, adj.neighbors, c))
        assert np.array_equal(out[0][0], out[1][0]) and np.array_equal(out[0][1], out[1][1])
        assert out[0][2] == out[1][2]
    c1, c2 = CostCounters(), CostCounters()
    a = rtree_self_join(build_rtree(rects, kernels=PY), c1)
    b = rtree_self_join(build_rtree(rects, kernels=cy), c2)
    assert np.array_equal(a.neighbors, b.neighbors) and c1 == c2


@needs_both
def test_brute_and_components_identical():
    cy = _backend.get_kernels("cython")
    rects, _ = random_instance(12, 400, 10)
    a = PY.brute_force_pairs(rects.xl, rects.yl, rects.xu, rects.yu)
    b = cy.brute_force_pairs(rects.xl, rects.yl, rects.xu, rects.yu)
    assert all(np.array_equal(x, y) for x, y in zip(a[:2], b[:2])) and a[2] == b[2]
    n = len(rects)
    assert np.array_equal(_components(n, a[0], a[1], PY), _components(n, a[0], a[1], cy))


def test_components_are_min_root():
    roots = _components(6, np.array([4, 1, 5]), np.array([2, 3, 4]), PY)
    assert roots.tolist() == [0, 1, 2, 1, 2, 2]


@pytest.mark.parametrize("threads", [2, 3, 8])
def test_run_queries_splits_and_merges_exactly(threads):
    def fake(start, stop):
        idx = np.arange(start, stop)
        return idx % 3, np.repeat(idx, idx % 3), int(idx.sum())

    single = _backend.run_queries(fake, 100, 1)
    multi = _backend.run_queries(fake, 100, threads)
    assert np.array_equal(single[0], multi[0]) and np.array_equal(single[1], multi[1])
    assert single[2] == multi[2] == sum(range(100))


def test_run_queries_empty():
    counts, nbrs, tests, tiles = _backend.run_queries(
        lambda s, e: (np.zeros(e - s, np.int64), np.zeros(0, np.int64), 0, 0), 0, 4
    )
    assert len(counts) == 0 and tests == 0
