"""Benchmark harness: timed joins per method with a cross-method correctness gate."""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from labelpart.datagen import DatasetSpec, generate_gaussians, generate_rect_arrays
from labelpart.grid_index import GridConfig
from labelpart.joins import METHODS, get_method
from labelpart.label_grouping import PartitionLoopConfig, connected_components, select_label_partition
from labelpart.two_layer_join import AdjacencyMap, CostCounters

log = logging.getLogger(__name__)

CSV_HEADER = "method,n_objects,grid_tiles,repeat,build_s,query_s,total_s,tests,groups,max_group"


class CorrectnessError(RuntimeError):
    """Join methods disagreed on the same input."""


@dataclass
class BenchRecord:
    method: str
    n_objects: int
    grid_tiles: int
    repeat_index: int
    build_time: float
    query_time: float
    total_time: float
    intersection_tests: int
    groups: int
    max_group_size: int
    threads: int = 1

    def row(self) -> list[str]:
        return [
            self.method,
            str(self.n_objects),
            str(self.grid_tiles),
            str(self.repeat_index),
            f"{self.build_time:.9f}",
            f"{self.query_time:.9f}",
            f"{self.total_time:.9f}",
            str(self.intersection_tests),
            str(self.groups),
            str(self.max_group_size),
        ]


def _check_methods(methods: Sequence[str]) -> list[str]:
    for m in methods:
        get_method(m)
    return list(methods)


def _rect_cell(spec, methods, grid_tiles, repeats, threads, kernels) -> list[BenchRecord]:
    M = generate_rect_arrays(spec)
    cfg = GridConfig(spec.domain, grid_tiles, grid_tiles)
    reference: tuple[str, AdjacencyMap] | None = None
    records = []
    for rep in range(repeats):
        for name in methods:
            m = get_method(name)
            counters = CostCounters()
            t0 = time.perf_counter()
            index = m.build(M, cfg, kernels)
            t1 = time.perf_counter()
            adj = m.query(index, counters, threads)
            t2 = time.perf_counter()
            if reference is None:
                reference = (name, adj)
            elif adj != reference[1]:
                raise CorrectnessError(
                    f"n={spec.n_objects} seed={spec.seed}: {name} disagrees with {reference[0]}\n"
                    + reference[1].diff(adj)
                )
            part = connected_components(adj)
            records.append(BenchRecord(
                name, spec.n_objects, grid_tiles, rep, t1 - t0, t2 - t1, t2 - t0,
                counters.intersection_tests, len(part), part.max_size, threads,
            ))
    return records


def _gaussian_cell(spec, methods, grid_tiles, repeats, threads, loop_cfg, kernels) -> list[BenchRecord]:
    mixtures = generate_gaussians(spec)
    cfg = GridConfig(spec.domain, grid_tiles, grid_tiles)
    reference = None
    records = []
    for rep in range(repeats):
        for name in methods:
            t0 = time.perf_counter()
            part, trace = select_label_partition(mixtures, loop_cfg, cfg, name, threads=threads, kernels=kernels)
            total = time.perf_counter() - t0
            key = (part, tuple(s.pg for s in trace.steps), trace.fallback)
            if reference is None:
                reference = (name, key)
            elif key != reference[1]:
                raise CorrectnessError(
                    f"n={spec.n_objects} seed={spec.seed}: partition loop with {name} "
                    f"disagrees with {reference[0]}"
                )
            records.append(BenchRecord(
                name, spec.n_objects, grid_tiles, rep,
                sum(s.build_s for s in trace.steps),
                sum(s.query_s for s in trace.steps),
                total,
                sum(s.counters.intersection_tests for s in trace.steps),
                len(part), part.max_size, threads,
            ))
    return records


def run_benchmark(
    specs: Iterable[DatasetSpec],
    methods: Sequence[str] = ("two-layer", "ig", "rtree"),
    grid_tiles: int = 100,
    repeats: int = 1,
    *,
    threads: int = 1,
    brute_cap: int = 20_000,
    loop_cfg: PartitionLoopConfig | None = None,
    kernels=None,
    on_cell: Callable[[list[BenchRecord]], None] | None = None,
) -> list[BenchRecord]:
    """Time every method on every dataset, ``repeats`` times each.

    A cell's records are released only after all of its methods agreed; a
    disagreement raises :class:`CorrectnessError`.  ``brute`` is skipped for
    datasets larger than ``brute_cap``.
    """
    methods = _check_methods(methods)
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    out: list[BenchRecord] = []
    for spec in specs:
        cell_methods = [m for m in methods if m != "brute" or spec.n_objects <= brute_cap]
        if len(cell_methods) < len(methods):
            log.warning("n=%d exceeds brute cap %d; skipping brute", spec.n_objects, brute_cap)
        if not cell_methods:
            continue
        if spec.mode == "rect":
            cell = _rect_cell(spec, cell_methods, grid_tiles, repeats, threads, kernels)
        else:
            cfg = loop_cfg or PartitionLoopConfig(l_max=10, pg_init=spec.pg_init)
            cell = _gaussian_cell(spec, cell_methods, grid_tiles, repeats, threads, cfg, kernels)
        out.extend(cell)
        if on_cell is not None:
            on_cell(cell)
    return out


def format_csv(records: Sequence[BenchRecord]) -> str:
    if not records:
        raise ValueError("no benchmark records to write")
    with_threads = any(r.threads != 1 for r in records)
    buf = io.StringIO()
    buf.write(CSV_HEADER + (",threads" if with_threads else "") + "\n")
    w = csv.writer(buf, lineterminator="\n")
    for r in records:
        w.writerow(r.row() + ([str(r.threads)] if with_threads else []))
    return buf.getvalue()


def emit_csv(records: Sequence[BenchRecord], path) -> Path:
    text = format_csv(records)
    path = Path(path)
    try:
        path.write_text(text, encoding="ascii")
    except OSError as exc:
        raise OSError(f"cannot write benchmark CSV to {path}: {exc.strerror}") from exc
    return path


def medians(records: Sequence[BenchRecord]) -> dict[tuple[str, int], dict[str, float]]:
    """Median build/query/total time and test count per (method, n)."""
    from statistics import median

    cells: dict[tuple[str, int], list[BenchRecord]] = {}
    for r in records:
        cells.setdefault((r.method, r.n_objects), []).append(r)
    return {
        key: {
            "build_s": median(r.build_time for r in rs),
            "query_s": median(r.query_time for r in rs),
            "total_s": median(r.total_time for r in rs),
            "tests": median(r.intersection_tests for r in rs),
        }
        for key, rs in cells.items()
    }


__all__ = [
    "BenchRecord", "CSV_HEADER", "CorrectnessError", "METHODS",
    "emit_csv", "format_csv", "medians", "run_benchmark",
]
