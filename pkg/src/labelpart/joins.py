"""Uniform two-phase (build, query) access to every join method."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from labelpart import baselines, two_layer_join
from labelpart.geometry import RectArrays, as_rect_arrays
from labelpart.grid_index import GridConfig, GridIndex
from labelpart.two_layer_join import AdjacencyMap, CostCounters

METHODS = ("two-layer", "ig", "rtree", "brute")


@dataclass(frozen=True)
class JoinMethod:
    name: str
    build: Callable[[RectArrays, GridConfig, object], object]
    query: Callable[[object, CostCounters, int], AdjacencyMap]


def _two_layer_query(index, counters, threads):
    return two_layer_join.self_join(index, counters, threads=threads)


_REGISTRY = {
    "two-layer": JoinMethod(
        "two-layer",
        lambda M, cfg, k: GridIndex(cfg, M, k),
        _two_layer_query,
    ),
    "ig": JoinMethod(
        "ig",
        lambda M, cfg, k: baselines.IGIndex(cfg, M, k),
        baselines.ig_self_join,
    ),
    "rtree": JoinMethod(
        "rtree",
        lambda M, cfg, k: baselines.RTreeIndex(M, 16, k),
        baselines.rtree_self_join,
    ),
    # no index to build; the query phase carries the whole cost
    "brute": JoinMethod(
        "brute",
        lambda M, cfg, k: (M, k),
        lambda state, counters, threads: baselines.brute_force_join(state[0], counters, state[1]),
    ),
}


def get_method(name: str) -> JoinMethod:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown join method {name!r}; choose from {', '.join(METHODS)}") from None


def run_join(method: str, M, cfg: GridConfig, counters: CostCounters | None = None,
             threads: int = 1, kernels=None) -> AdjacencyMap:
    m = get_method(method)
    counters = counters if counters is not None else CostCounters()
    return m.query(m.build(as_rect_arrays(M), cfg, kernels), counters, threads)
