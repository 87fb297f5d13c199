#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Runs each kernel on shared random inputs, reports best-of-N wall time per
implementation, and double-checks that both return identical results on
the benchmarked inputs.  Usage:

    python3 benchmarks/bench_kernels.py [--size 2000] [--repeats 5]
"""
import argparse
import time

import numpy as np

from proxpoint._kernels import pure

try:
    from proxpoint._kernels import _core as compiled
except ImportError:
    compiled = None


def best_of(fn, args, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b)) and len(a) == len(b)
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=2000, help="matrix side length")
    parser.add_argument("--tri-size", type=int, default=300, help="triangle-scan side length")
    parser.add_argument("--repeats", type=int, default=5, help="timings kept as best-of-N")
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    n = args.size
    d = np.ascontiguousarray(rng.random((n, n)))
    e = np.ascontiguousarray(rng.random((n, n)))
    t = args.tri_size
    tri = np.ascontiguousarray(rng.random((t, t)))

    cases = [
        ("min_entry", pure.min_entry, (d,)),
        ("max_diff", pure.max_diff, (d, e)),
        ("max_abs_diff", pure.max_abs_diff, (d, e)),
        ("row_mins", pure.row_mins, (d,)),
        ("hausdorff_value", pure.hausdorff_value, (d,)),
        ("triangle_scan", pure.triangle_scan, (tri,)),
    ]

    print(f"matrix {n}x{n} (triangle scan {t}x{t}), best of {args.repeats}")
    header = f"{'kernel':<16} {'pure [ms]':>12} {'compiled [ms]':>14} {'speedup':>9}  identical"
    print(header)
    print("-" * len(header))
    for name, pure_fn, data in cases:
        pure_t, pure_res = best_of(pure_fn, data, args.repeats)
        if compiled is None:
            print(f"{name:<16} {pure_t * 1e3:>12.3f} {'n/a':>14} {'n/a':>9}  n/a")
            continue
        comp_fn = getattr(compiled, name)
        comp_t, comp_res = best_of(comp_fn, data, args.repeats)
        agree = "yes" if same(pure_res, comp_res) else "NO"
        print(
            f"{name:<16} {pure_t * 1e3:>12.3f} {comp_t * 1e3:>14.3f} "
            f"{pure_t / comp_t:>8.2f}x  {agree}"
        )
    if compiled is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
