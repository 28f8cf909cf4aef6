"""Time the compiled kernels against the pure-Python fallback.

    python scripts/compare_backends.py --n 20000 --repeats 3
"""

import argparse
import statistics
import time

from labelpart import _backend
from labelpart.baselines import build_ig, build_rtree, ig_self_join, rtree_self_join
from labelpart.datagen import DatasetSpec, generate_rect_arrays
from labelpart.grid_index import GridConfig, build_grid
from labelpart.two_layer_join import self_join

STAGES = {
    "two-layer": (lambda r, c, k: build_grid(r, c, k), self_join),
    "ig": (lambda r, c, k: build_ig(r, c, k), ig_self_join),
    "rtree": (lambda r, c, k: build_rtree(r, kernels=k), rtree_self_join),
}


def timed(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20_000)
    ap.add_argument("--grid-tiles", type=int, default=100)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rects = generate_rect_arrays(DatasetSpec(args.n, seed=args.seed))
    cfg = GridConfig.square(2000.0, args.grid_tiles)
    backends = sorted(_backend.BACKENDS)
    if len(backends) < 2:
        print("compiled extension not built; only the python backend is available")

    print(f"n={args.n} grid={args.grid_tiles}x{args.grid_tiles} median of {args.repeats}")
    print(f"{'method':<10} {'backend':<8} {'build ms':>10} {'join ms':>10} {'speedup':>8}")
    for method, (build, join) in STAGES.items():
        results = {}
        for name in backends:
            k = _backend.get_kernels(name)
            tb, index = timed(lambda: build(rects, cfg, k), args.repeats)
            tq, adj = timed(lambda: join(index), args.repeats)
            results[name] = (tb, tq, adj)
        ref = results[backends[0]][2]
        assert all(r[2] == ref for r in results.values()), f"{method}: backends disagree"
        slow = results["python"][0] + results["python"][1]
        for name, (tb, tq, _) in results.items():
            print(f"{method:<10} {name:<8} {tb * 1e3:>10.1f} {tq * 1e3:>10.1f} {slow / (tb + tq):>7.1f}x")


if __name__ == "__main__":
    main()
