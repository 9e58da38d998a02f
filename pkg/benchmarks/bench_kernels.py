"""Compare the compiled and pure-Python kernels on fixture-sized inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-N wall time per kernel and backend, and the speedup.
Exits non-zero if the compiled extension is not built.
"""

import argparse
import sys
import timeit

import numpy as np

from wildfire_psps import _purepy

try:
    from wildfire_psps import _speedups
except ImportError:
    _speedups = None


def workloads(rng):
    # 366 days of a 40x40 raster, one line touching ~60 cells
    stack = np.ascontiguousarray(rng.integers(0, 150, size=(366, 40, 40)).astype(float))
    stack[:, :2, :2] = np.nan
    cells = rng.choice(1600, size=60, replace=False)
    rows = (cells // 40).astype(np.int64)
    cols = (cells % 40).astype(np.int64)
    segments = rng.uniform(0, 400, size=(2000, 4))

    def trace(mod):
        def run():
            for u0, v0, u1, v1 in segments:
                mod.segment_cells(u0, v0, u1, v1, 400, 400)
        return run

    return {
        "segment_cells (2000 segments, 400x400 grid)": trace,
        "line_day_metrics (366 days x 60 px)": lambda mod: lambda: mod.line_day_metrics(stack, rows, cols, 80.0),
        "pixel_moments (366 days x 60 px)": lambda mod: lambda: mod.pixel_moments(stack, rows, cols, 75.0),
    }


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _speedups is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1
    print(f"{'kernel':<46}{'pure (ms)':>12}{'cython (ms)':>13}{'speedup':>9}")
    for name, make in workloads(np.random.default_rng(args.seed)).items():
        tp = best(make(_purepy), args.repeat)
        tc = best(make(_speedups), args.repeat)
        print(f"{name:<46}{tp * 1e3:>12.2f}{tc * 1e3:>13.2f}{tp / tc:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
