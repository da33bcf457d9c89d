"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--csv out.csv]

Both backends are checked for bit-identical results before timing.
"""

import argparse
import importlib
import csv
import sys
import timeit

import numpy as np

from operonet import _kernels


def cases(rng):
    x = rng.standard_normal((256, 20))
    w = rng.standard_normal((256, 20, 20))
    g = rng.standard_normal((256, 20))
    u = rng.random(9_999)
    state = np.array([1, 2, 3, 4], dtype=np.uint64)
    return {
        "vecmat 256x20x20": lambda k: k.vecmat(x, w),
        "vecmat_backward 256x20x20": lambda k: k.vecmat_backward(x, w, g),
        "xoshiro_fill 10k": lambda k: k.xoshiro_fill(state.copy(), 10_000),
        "fisher_yates 10k": lambda k: k.fisher_yates(u),
    }


def same(a, b):
    if isinstance(a, tuple):
        return all(same(p, q) for p, q in zip(a, b))
    return np.array_equal(a, b)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--csv")
    args = ap.parse_args(argv)

    try:
        compiled = importlib.import_module("operonet._kernels._ckernels")
    except ImportError:
        print("compiled kernels are not built; install the package to compile them", file=sys.stderr)
        return 1
    python = _kernels.python_backend
    rows = []
    for name, fn in cases(np.random.default_rng(0)).items():
        if not same(fn(compiled), fn(python)):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        t_c = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat))
        t_p = min(timeit.repeat(lambda: fn(python), number=1, repeat=args.repeat))
        rows.append((name, t_c, t_p, t_p / t_c))

    print(f"{'kernel':<28}{'cython (ms)':>12}{'python (ms)':>13}{'speedup':>9}")
    for name, t_c, t_p, ratio in rows:
        print(f"{name:<28}{t_c * 1e3:>12.3f}{t_p * 1e3:>13.3f}{ratio:>8.1f}x")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kernel", "cython_seconds", "python_seconds", "speedup"])
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
