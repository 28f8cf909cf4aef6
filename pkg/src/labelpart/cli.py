"""Command-line entry point.

    labelpart bench --n-sweep 10k:100k:10k --methods two-layer,ig,rtree --repeats 5 --out sweep.csv
    labelpart gen --n 30k --seed 7 --out rects.txt
    labelpart join --dataset rects.txt --method two-layer --out adj.txt
    labelpart partition --n 5000 --lmax 8 --out partition.json
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from labelpart import _backend
from labelpart.bench import CorrectnessError, format_csv, emit_csv, medians, run_benchmark
from labelpart.datagen import DatasetSpec, generate_gaussians, generate_rect_arrays, read_dump, write_dump
from labelpart.geometry import MixtureArrays, Rect
from labelpart.grid_index import GridConfig
from labelpart.joins import METHODS, run_join
from labelpart.label_grouping import PartitionLoopConfig, select_label_partition

log = logging.getLogger("labelpart")


def parse_count(text: str) -> int:
    t = text.strip().lower().replace("_", "")
    mult = 1
    if t.endswith("k"):
        mult, t = 1_000, t[:-1]
    elif t.endswith("m"):
        mult, t = 1_000_000, t[:-1]
    try:
        value = int(float(t) * mult)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a count: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"count must be positive: {text!r}")
    return value


def parse_sweep(text: str) -> list[int]:
    try:
        lo, hi, step = (parse_count(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"sweep must be lo:hi:step, got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError("sweep upper bound below lower bound")
    return list(range(lo, hi + 1, step))


def parse_methods(text: str) -> list[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad}; choose from {','.join(METHODS)}")
    return methods


def _add_dataset_args(p: argparse.ArgumentParser, *, sweep: bool = False):
    g = p.add_argument_group("dataset")
    if sweep:
        n = g.add_mutually_exclusive_group()
        n.add_argument("--n", type=parse_count, help="number of objects (accepts 10k, 1.5m)")
        n.add_argument("--n-sweep", type=parse_sweep, metavar="LO:HI:STEP", help="inclusive sweep over n")
    else:
        g.add_argument("--n", type=parse_count, default=30_000, help="number of objects (default 30k)")
    g.add_argument("--area-m", type=float, default=2000.0, help="side of the square area in metres")
    g.add_argument("--max-extent-m", type=float, default=20.0, help="largest gate width/height in metres")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--mode", choices=("rect", "gaussian"), default="rect")


def _add_loop_args(p: argparse.ArgumentParser, lmax_default=None):
    g = p.add_argument_group("partition loop")
    g.add_argument("--pg-init", type=float, default=0.9973)
    g.add_argument("--pg-factor", type=float, default=0.8)
    g.add_argument("--pg-floor", type=float, default=0.3)
    g.add_argument("--lmax", type=int, default=lmax_default)


def _add_run_args(p: argparse.ArgumentParser):
    p.add_argument("--grid-tiles", type=int, default=100, help="tiles per axis (default 100)")
    p.add_argument("--threads", type=int, default=1, help="query threads per join")
    p.add_argument("--backend", choices=sorted(_backend.BACKENDS), default=None,
                   help=f"kernel backend (default {_backend.kernels.NAME})")


def _spec(args, n: int) -> DatasetSpec:
    domain = Rect.from_bounds(0.0, 0.0, args.area_m, args.area_m)
    return DatasetSpec(n, domain, args.max_extent_m, args.seed, args.mode, args.pg_init)


def _loop_cfg(args) -> PartitionLoopConfig:
    return PartitionLoopConfig(args.lmax, args.pg_init, args.pg_factor, args.pg_floor)


def _dataset_rects(spec: DatasetSpec):
    if spec.mode == "rect":
        return generate_rect_arrays(spec)
    return MixtureArrays(generate_gaussians(spec)).gates(spec.pg_init)


# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    spec = _spec(args, args.n)
    path = write_dump(_dataset_rects(spec), spec.seed, args.out)
    log.info("wrote %d rects to %s", spec.n_objects, path)
    return 0


def cmd_join(args) -> int:
    if args.dataset:
        rects, _ = read_dump(args.dataset)
    else:
        rects = _dataset_rects(_spec(args, args.n))
    cfg = GridConfig.square(args.area_m, args.grid_tiles)
    kernels = _backend.get_kernels(args.backend)
    adj = run_join(args.method, rects, cfg, threads=args.threads, kernels=kernels)
    lines = []
    for lab in adj.labels:
        nbrs = " ".join(str(x) for x in sorted(adj[lab]))
        lines.append(f"{lab}: {nbrs}".rstrip())
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_partition(args) -> int:
    if args.lmax is None:
        raise SystemExit("partition: --lmax is required")
    spec = _spec(args, args.n)
    if spec.mode != "gaussian":
        spec = DatasetSpec(spec.n_objects, spec.domain, spec.max_extent, spec.seed, "gaussian", spec.pg_init)
    cfg = GridConfig.square(args.area_m, args.grid_tiles)
    part, trace = select_label_partition(
        generate_gaussians(spec), _loop_cfg(args), cfg, args.method,
        threads=args.threads, kernels=_backend.get_kernels(args.backend),
    )
    doc = {
        "n_objects": spec.n_objects,
        "seed": spec.seed,
        "method": args.method,
        "groups": sorted(sorted(g) for g in part.groups),
        "fallback": trace.fallback,
        "valid": trace.report.ok,
        "report": trace.report.summary(),
        "trace": [
            {"pg": s.pg, "max_group_size": s.max_group_size, "n_groups": s.n_groups,
             "intersection_tests": s.counters.intersection_tests}
            for s in trace.steps
        ],
    }
    _write(args.out, json.dumps(doc, indent=1) + "\n")
    return 0


def cmd_bench(args) -> int:
    ns = args.n_sweep or [args.n or 30_000]
    specs = [_spec(args, n) for n in ns]
    if args.dump_dir:
        Path(args.dump_dir).mkdir(parents=True, exist_ok=True)
        for s in specs:
            write_dump(_dataset_rects(s), s.seed, Path(args.dump_dir) / f"rects_n{s.n_objects}_s{s.seed}.txt")
    loop_cfg = _loop_cfg(args) if args.mode == "gaussian" else None
    if args.mode == "gaussian" and args.lmax is None:
        raise SystemExit("bench: --lmax is required with --mode gaussian")

    def report(cell):
        for (method, n), m in medians(cell).items():
            log.info("n=%-7d %-9s total %.4fs  build %.4fs  query %.4fs  tests %d",
                     n, method, m["total_s"], m["build_s"], m["query_s"], m["tests"])

    try:
        records = run_benchmark(
            specs, args.methods, args.grid_tiles, args.repeats,
            threads=args.threads, brute_cap=args.brute_cap, loop_cfg=loop_cfg,
            kernels=_backend.get_kernels(args.backend), on_cell=report,
        )
    except CorrectnessError as exc:
        print(f"correctness gate failed: {exc}", file=sys.stderr)
        return 2
    if args.out and args.out != "-":
        emit_csv(records, args.out)
    else:
        sys.stdout.write(format_csv(records))
    return 0


def _write(out: str | None, text: str):
    if out and out != "-":
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="labelpart", description=__doc__.split("\n")[0] or None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="time join methods and write CSV")
    _add_dataset_args(p, sweep=True)
    _add_loop_args(p)
    _add_run_args(p)
    p.add_argument("--methods", type=parse_methods, default=["two-layer", "ig", "rtree"])
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--brute-cap", type=parse_count, default=20_000)
    p.add_argument("--dump-dir", help="also write each dataset dump here")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="write a dataset dump")
    _add_dataset_args(p)
    p.add_argument("--pg-init", type=float, default=0.9973, help="gaussian mode: gate probability")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("join", help="self-join a dataset and print the adjacency")
    _add_dataset_args(p)
    _add_run_args(p)
    p.add_argument("--pg-init", type=float, default=0.9973, help="gaussian mode: gate probability")
    p.add_argument("--dataset", help="dump file to read instead of generating")
    p.add_argument("--method", choices=METHODS, default="two-layer")
    p.add_argument("--out", help="adjacency output path (default stdout)")
    p.set_defaults(func=cmd_join)

    p = sub.add_parser("partition", help="run the gate-shrinking partition loop")
    _add_dataset_args(p)
    _add_loop_args(p)
    _add_run_args(p)
    p.add_argument("--method", choices=METHODS, default="two-layer")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_partition)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        parser.exit(1, f"labelpart: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
