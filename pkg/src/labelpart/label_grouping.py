"""Label groups from gate adjacency, and the gate-shrinking partition loop.

A valid partition has three properties:

1. every group is connected through chains of intersecting gates;
2. no gate of one group intersects a gate of another group;
3. no group holds more than ``l_max`` labels.

Connected components of the gate-intersection graph give 1 and 2.  For 3 the
loop lowers the gating probability, which shrinks every gate, until the
largest component fits.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from labelpart import _backend
from labelpart.geometry import GaussianMixture2D, Label, MixtureArrays, Rect, RectArrays, as_rect_arrays
from labelpart.grid_index import GridConfig, clamp_arrays
from labelpart.joins import get_method
from labelpart.two_layer_join import AdjacencyMap, CostCounters

log = logging.getLogger(__name__)


class AsymmetricAdjacencyError(ValueError):
    pass


@dataclass(frozen=True)
class LabelPartition:
    groups: tuple[frozenset, ...]

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(frozenset(g) for g in self.groups))
        if any(not g for g in self.groups):
            raise ValueError("empty label group")
        seen = set()
        for g in self.groups:
            if seen & g:
                raise ValueError(f"label(s) in more than one group: {sorted(seen & g)}")
            seen |= g

    def __len__(self):
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)

    @property
    def sizes(self) -> list[int]:
        return [len(g) for g in self.groups]

    @property
    def max_size(self) -> int:
        return max(self.sizes, default=0)

    @property
    def labels(self) -> frozenset:
        return frozenset().union(*self.groups)

    def as_set_of_sets(self) -> frozenset[frozenset]:
        return frozenset(self.groups)

    def __eq__(self, other):
        if not isinstance(other, LabelPartition):
            return NotImplemented
        return self.as_set_of_sets() == other.as_set_of_sets()

    def __hash__(self):
        return hash(self.as_set_of_sets())


@dataclass(frozen=True)
class PartitionLoopConfig:
    l_max: int
    pg_init: float = 0.9973
    pg_factor: float = 0.8
    pg_floor: float = 0.3

    def __post_init__(self):
        if self.l_max < 1:
            raise ValueError("l_max must be at least 1")
        if not 0 < self.pg_floor < self.pg_init < 1:
            raise ValueError("need 0 < pg_floor < pg_init < 1")
        if not 0 < self.pg_factor < 1:
            raise ValueError("pg_factor must be in (0, 1)")


def _components(n: int, src: np.ndarray, dst: np.ndarray, kernels=None) -> np.ndarray:
    k = kernels or _backend.kernels
    return k.component_roots(n, np.ascontiguousarray(src, dtype=np.int64), np.ascontiguousarray(dst, dtype=np.int64))


def connected_components(
    adj: AdjacencyMap | Mapping[Label, Iterable[Label]],
    all_labels: Iterable[Label] | None = None,
    kernels=None,
) -> LabelPartition:
    """Connected components of the adjacency graph as label groups.

    Labels in ``all_labels`` without an adjacency entry become singletons.
    Groups are ordered by the first position of any of their labels.
    """
    if not isinstance(adj, AdjacencyMap):
        adj = AdjacencyMap.from_mapping(adj, all_labels)
    elif all_labels is not None:
        known = set(adj.labels)
        extra = [lab for lab in all_labels if lab not in known]
        if extra:
            labels = adj.labels + extra
            offsets = np.concatenate([adj.offsets, np.full(len(extra), adj.offsets[-1])])
            adj = AdjacencyMap(labels, offsets, adj.neighbors)
    if not adj.is_symmetric():
        raise AsymmetricAdjacencyError("adjacency map is not symmetric")
    n = len(adj.labels)
    src, dst = adj.undirected_edges()
    roots = _components(n, src, dst, kernels)
    return _groups_from_roots(adj.labels, roots)


def _groups_from_roots(labels: Sequence, roots: np.ndarray) -> LabelPartition:
    order = np.argsort(roots, kind="stable")
    sorted_roots = roots[order]
    cuts = np.flatnonzero(np.diff(sorted_roots)) + 1
    chunks = np.split(order, cuts) if len(order) else []
    # roots are the minimum position of each component, so sorting by root
    # already orders groups by first appearance
    return LabelPartition(tuple(frozenset(labels[int(i)] for i in c) for c in chunks))


# ---------------------------------------------------------------------------
# Validation


def intersecting_pairs(rects: RectArrays, chunk: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """All intersecting position pairs ``(a, b)``, ``a < b``, by an x-sorted sweep.

    Kept independent of the grid and tree joins so that it can check them.
    """
    n = len(rects)
    if n < 2:
        e = np.empty(0, dtype=np.int64)
        return e, e
    order = np.argsort(rects.xl, kind="stable")
    xl, xu = rects.xl[order], rects.xu[order]
    yl, yu = rects.yl[order], rects.yu[order]
    # candidates for sorted slot i are slots i+1 .. end[i]-1, whose x_l ≤ x_u[i]
    end = np.searchsorted(xl, xu, side="right")
    srcs, dsts = [], []
    for s in range(0, n, chunk):
        i = np.arange(s, min(s + chunk, n))
        cnt = np.maximum(end[i] - i - 1, 0)
        if not cnt.sum():
            continue
        a = np.repeat(i, cnt)
        step = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        b = a + 1 + step
        hit = (yl[b] <= yu[a]) & (yl[a] <= yu[b]) & (xl[b] <= xu[a])
        srcs.append(order[a[hit]])
        dsts.append(order[b[hit]])
    if not srcs:
        e = np.empty(0, dtype=np.int64)
        return e, e
    p, q = np.concatenate(srcs), np.concatenate(dsts)
    return np.minimum(p, q).astype(np.int64), np.maximum(p, q).astype(np.int64)


@dataclass(frozen=True)
class ConditionFailure:
    condition: int  # 1 connectivity, 2 separation, 3 size
    groups: tuple[int, ...]
    detail: str
    caused_by_fallback: bool = False


@dataclass
class PartitionReport:
    n_groups: int
    connectivity_ok: bool
    separation_ok: bool
    size_ok: bool
    failures: list[ConditionFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.connectivity_ok and self.separation_ok and self.size_ok

    def failed_conditions(self) -> set[int]:
        return {f.condition for f in self.failures}

    def summary(self) -> str:
        if self.ok:
            return f"valid partition ({self.n_groups} groups)"
        parts = []
        for f in self.failures[:5]:
            why = " [fallback split]" if f.caused_by_fallback else ""
            parts.append(f"condition {f.condition} on groups {list(f.groups)}: {f.detail}{why}")
        if len(self.failures) > 5:
            parts.append(f"... {len(self.failures) - 5} more")
        return "; ".join(parts)


def validate_partition(
    p: LabelPartition,
    gmbrs: Mapping[Label, Rect] | RectArrays,
    l_max: int,
    fallback_groups: Iterable[int] = (),
    kernels=None,
) -> PartitionReport:
    """Check connectivity, separation and size of every group.

    ``fallback_groups`` lists indices of groups produced by a forced split;
    failures touching them are flagged as caused by the fallback.
    """
    rects = as_rect_arrays(gmbrs)
    fb = set(fallback_groups)
    group_of = np.full(len(rects), -1, dtype=np.int64)
    for gi, g in enumerate(p.groups):
        for lab in g:
            try:
                pos = rects.position(lab)
            except KeyError:
                raise ValueError(f"partition label {lab!r} has no gate") from None
            group_of[pos] = gi
    if np.any(group_of < 0):
        missing = [rects.labels[i] for i in np.flatnonzero(group_of < 0)[:5]]
        raise ValueError(f"partition does not cover labels, e.g. {missing}")

    a, b = intersecting_pairs(rects)
    ga, gb = group_of[a], group_of[b]
    failures: list[ConditionFailure] = []

    cross = ga != gb
    crossing = sorted({(int(min(x, y)), int(max(x, y))) for x, y in zip(ga[cross], gb[cross])})
    for g1, g2 in crossing:
        failures.append(ConditionFailure(
            2, (g1, g2), "gates of different groups intersect", g1 in fb or g2 in fb
        ))

    same = ~cross
    roots = _components(len(rects), a[same], b[same], kernels)
    n_roots = np.zeros(len(p.groups), dtype=np.int64)
    np.add.at(n_roots, group_of[np.unique(roots)], 1)
    for gi in np.flatnonzero(n_roots > 1):
        failures.append(ConditionFailure(
            1, (int(gi),), f"group splits into {n_roots[gi]} disconnected parts", int(gi) in fb
        ))

    for gi, g in enumerate(p.groups):
        if len(g) > l_max:
            failures.append(ConditionFailure(3, (gi,), f"size {len(g)} exceeds l_max={l_max}"))

    failures.sort(key=lambda f: (f.condition, f.groups))
    conds = {f.condition for f in failures}
    return PartitionReport(len(p.groups), 1 not in conds, 2 not in conds, 3 not in conds, failures)


# ---------------------------------------------------------------------------
# Partition loop


@dataclass
class TraceStep:
    pg: float
    max_group_size: int
    n_groups: int
    counters: CostCounters
    partition: LabelPartition
    build_s: float = 0.0
    query_s: float = 0.0
    gates: RectArrays | None = None


@dataclass
class PartitionTrace:
    steps: list[TraceStep] = field(default_factory=list)
    fallback: bool = False
    fallback_groups: tuple[int, ...] = ()
    report: PartitionReport | None = None

    @property
    def final_pg(self) -> float:
        return self.steps[-1].pg

    def as_rows(self) -> list[dict]:
        return [
            {"pg": s.pg, "max_group_size": s.max_group_size, "n_groups": s.n_groups, **s.counters.as_dict()}
            for s in self.steps
        ]


def partition_gates(
    gates: RectArrays,
    grid: GridConfig,
    method: str = "two-layer",
    counters: CostCounters | None = None,
    threads: int = 1,
    kernels=None,
    timings: dict | None = None,
) -> LabelPartition:
    """Join the gates with ``method`` and group the labels.

    Gates entirely outside the grid domain stay singletons; all methods see
    the same in-domain subset so their partitions agree.  When given,
    ``timings`` receives ``build_s`` and ``query_s``.
    """
    m = get_method(method)
    counters = counters if counters is not None else CostCounters()
    _, inside = clamp_arrays(gates, grid)
    sub = gates if inside.all() else gates.subset(np.flatnonzero(inside))
    t0 = time.perf_counter()
    index = m.build(sub, grid, kernels)
    t1 = time.perf_counter()
    adj = m.query(index, counters, threads)
    t2 = time.perf_counter()
    if timings is not None:
        timings["build_s"] = t1 - t0
        timings["query_s"] = t2 - t1
    return connected_components(adj, gates.labels, kernels)


def fallback_split(p: LabelPartition, l_max: int) -> tuple[LabelPartition, tuple[int, ...]]:
    """Cut every oversized group, labels in descending order, into chunks of ``l_max``."""
    groups, forced = [], []
    for g in p.groups:
        if len(g) <= l_max:
            groups.append(g)
            continue
        ordered = sorted(g, reverse=True)
        for s in range(0, len(ordered), l_max):
            forced.append(len(groups))
            groups.append(frozenset(ordered[s:s + l_max]))
    return LabelPartition(tuple(groups)), tuple(forced)


def select_label_partition(
    labels: Mapping[Label, GaussianMixture2D],
    cfg: PartitionLoopConfig,
    grid: GridConfig,
    method: str = "two-layer",
    *,
    threads: int = 1,
    kernels=None,
    keep_gates: bool = False,
) -> tuple[LabelPartition, PartitionTrace]:
    """Shrink all gates until every label group has at most ``cfg.l_max`` labels.

    Each round builds gates at the current gating probability, joins them and
    groups the labels; the probability is then multiplied by
    ``cfg.pg_factor``.  If it would drop below ``cfg.pg_floor`` first, the
    oversized groups are split by :func:`fallback_split` and the trace is
    marked.
    """
    if not labels:
        raise ValueError("no labels to partition")
    mixtures = MixtureArrays(labels)
    trace = PartitionTrace()
    pg = cfg.pg_init
    prev: TraceStep | None = None
    while True:
        gates = mixtures.gates(pg)
        counters = CostCounters()
        timings: dict = {}
        part = partition_gates(gates, grid, method, counters, threads, kernels, timings)
        step = TraceStep(pg, part.max_size, len(part), counters, part, **timings,
                         gates=gates if keep_gates else None)
        if prev is not None:
            assert bool(prev_gates.contains(gates).all()), "gates grew while P_G decreased"
            assert step.max_group_size <= prev.max_group_size, "largest group grew while P_G decreased"
        trace.steps.append(step)
        log.debug("P_G=%.6g groups=%d max=%d tests=%d", pg, len(part), part.max_size,
                  counters.intersection_tests)
        if part.max_size <= cfg.l_max:
            break
        nxt = pg * cfg.pg_factor
        if nxt < cfg.pg_floor:
            part, forced = fallback_split(part, cfg.l_max)
            trace.fallback = True
            trace.fallback_groups = forced
            log.info("P_G floor reached with a group of %d labels; fallback made %d groups",
                     step.max_group_size, len(forced))
            break
        prev, prev_gates, pg = step, gates, nxt
    trace.report = validate_partition(part, gates, cfg.l_max, trace.fallback_groups, kernels)
    return part, trace
