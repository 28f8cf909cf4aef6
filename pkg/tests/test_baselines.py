import numpy as np
import pytest

from labelpart.baselines import (
    build_ig,
    build_rtree,
    brute_force_join,
    ig_join,
    rtree_join,
)
from labelpart.geometry import Rect
from labelpart.grid_index import GridConfig, TileId
from labelpart.joins import METHODS, run_join
from labelpart.two_layer_join import CostCounters, two_layer_label_partition

from instances import naive_adjacency, random_instance

R = Rect.from_bounds
G10 = GridConfig.square(100.0, 10)


def test_brute_force_small():
    assert brute_force_join([("a", R(0, 0, 1, 1)), ("b", R(5, 5, 6, 6))]).to_dict() == {"a": set(), "b": set()}
    tri = [("a", R(0, 0, 3, 3)), ("b", R(1, 1, 4, 4)), ("c", R(2, 2, 5, 5))]
    assert brute_force_join(tri).to_dict() == {"a": {"b", "c"}, "b": {"a", "c"}, "c": {"a", "b"}}


def test_brute_force_counts_every_pair(kernels):
    rects, _ = random_instance(1, 100, 10)
    c = CostCounters()
    adj = brute_force_join(rects, c, kernels)
    assert c.intersection_tests == 4950
    assert adj.to_dict() == naive_adjacency(rects)


def test_rtree_single_and_identical():
    assert rtree_join([("a", R(0, 0, 1, 1))]).to_dict() == {"a": set()}
    same = [(i, R(4, 4, 9, 9)) for i in range(50)]
    adj = rtree_join(same)
    assert all(len(adj[i]) == 49 for i in range(50))


@pytest.mark.parametrize("n, fanout", [(1, 16), (15, 4), (16, 16), (17, 16), (2000, 16), (999, 3)])
def test_rtree_structure(n, fanout):
    rects, _ = random_instance(n, n, 10)
    t = build_rtree(rects, fanout)
    # every child box inside its parent
    for node in range(len(t.nxl)):
        s, e = t.cstart[node], t.cend[node]
        if t.is_leaf[node]:
            child = (t.exl[s:e], t.eyl[s:e], t.exu[s:e], t.eyu[s:e])
        else:
            child = (t.nxl[s:e], t.nyl[s:e], t.nxu[s:e], t.nyu[s:e])
        assert 1 <= e - s <= fanout
        assert np.all(child[0] >= t.nxl[node]) and np.all(child[1] >= t.nyl[node])
        assert np.all(child[2] <= t.nxu[node]) and np.all(child[3] <= t.nyu[node])
    # leaves hold each entry exactly once
    leaf_slots = np.concatenate([np.arange(t.cstart[i], t.cend[i]) for i in np.flatnonzero(t.is_leaf)])
    assert sorted(t.entry_order[leaf_slots].tolist()) == list(range(n))
    # children of internal nodes are each referenced once, the root by none
    internal = np.flatnonzero(t.is_leaf == 0)
    kids = [k for i in internal for k in range(t.cstart[i], t.cend[i])]
    assert sorted(kids) == list(range(1, len(t.nxl)))


def test_rtree_counts_node_and_entry_tests():
    rects, _ = random_instance(2, 500, 10)
    c = CostCounters()
    rtree_join(rects, c)
    # at least one test per entry reached plus the root per query
    assert c.intersection_tests > 500


def test_rtree_rejects_tiny_fanout():
    with pytest.raises(ValueError):
        build_rtree([("a", R(0, 0, 1, 1))], fanout=1)


def test_ig_pair_across_tile_boundary_reported_once():
    pairs = [("a", R(5, 5, 15, 9)), ("b", R(8, 6, 18, 8))]
    idx = build_ig(pairs, G10)
    assert len(idx.tile_entries(TileId(0, 0))) == 2
    assert len(idx.tile_entries(TileId(1, 0))) == 2
    c = CostCounters()
    adj = ig_join(pairs, G10, c)
    assert adj.to_dict() == {"a": {"b"}, "b": {"a"}}
    assert adj.n_directed_edges == 2
    # every hit computes one reference point; there are 2 shared tiles per query
    assert c.candidates_examined == 4
    assert c.tiles_visited == 4


def test_ig_pair_inside_one_tile():
    c = CostCounters()
    adj = ig_join([("a", R(1, 1, 4, 4)), ("b", R(2, 2, 6, 6))], G10, c)
    assert adj.to_dict() == {"a": {"b"}, "b": {"a"}}
    assert c.tiles_visited == 2 and c.intersection_tests == 2


def test_ig_reference_point_on_shared_corner():
    # the intersection is one point lying exactly on four tiles' corner
    adj = ig_join([("a", R(5, 5, 10, 10)), ("b", R(10, 10, 15, 15))], G10)
    assert adj.to_dict() == {"a": {"b"}, "b": {"a"}}


def test_reference_point_passes_in_exactly_one_tile():
    """Count, over every tile shared by an intersecting pair, how often the
    lower-left corner of their intersection is owned by that tile."""
    rects, cfg = random_instance(4, 300, 9)
    idx = build_ig(rects, cfg)
    r = idx.rects
    owners = {}
    for t in cfg.tiles():
        pos = idx.tile_positions(t).tolist()
        for i in pos:
            for j in pos:
                if i >= j or not (r.xl[i] <= r.xu[j] and r.xl[j] <= r.xu[i] and r.yl[i] <= r.yu[j] and r.yl[j] <= r.yu[i]):
                    continue
                px, py = max(r.xl[i], r.xl[j]), max(r.yl[i], r.yl[j])
                if (cfg.locate_x(px), cfg.locate_y(py)) == tuple(t):
                    owners[(i, j)] = owners.get((i, j), 0) + 1
    expected = {tuple(sorted((i, j))) for i in range(len(r)) for j in range(i + 1, len(r))
                if r.xl[i] <= r.xu[j] and r.xl[j] <= r.xu[i] and r.yl[i] <= r.yu[j] and r.yl[j] <= r.yu[i]}
    assert set(owners) == expected
    assert set(owners.values()) <= {1}


@pytest.mark.parametrize("seed", range(3))
def test_all_methods_agree_2000(kernels, seed):
    rects, cfg = random_instance(200 + seed, 2000, None)
    ref = brute_force_join(rects, kernels=kernels)
    assert rtree_join(rects, kernels=kernels) == ref
    assert ig_join(rects, cfg, kernels=kernels) == ref
    assert two_layer_label_partition(cfg, rects, kernels=kernels)[0] == ref


def test_run_join_registry():
    rects, cfg = random_instance(6, 200, 8)
    results = [run_join(m, rects, cfg) for m in METHODS]
    assert all(r == results[0] for r in results)
    with pytest.raises(ValueError):
        run_join("quadtree", rects, cfg)


def test_counter_ordering_dense_uniform():
    from labelpart.datagen import DatasetSpec, generate_rect_arrays

    rects = generate_rect_arrays(DatasetSpec(10_000, seed=1))
    cfg = GridConfig.square(2000.0, 100)
    c2, ci, cb = CostCounters(), CostCounters(), CostCounters()
    two_layer_label_partition(cfg, rects)[1]
    run_join("two-layer", rects, cfg, c2)
    run_join("ig", rects, cfg, ci)
    brute_force_join(rects, cb)
    assert c2.intersection_tests <= ci.intersection_tests <= cb.intersection_tests
