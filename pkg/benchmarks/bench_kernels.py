"""Compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 32] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from wmh2 import _kernels_py

try:
    from wmh2 import _kernels
except ImportError:
    _kernels = None


def cases(n):
    rng = np.random.default_rng(0)
    nt, pts = 16, n ** 3
    src = rng.standard_normal((nt, pts)) + 1j * rng.standard_normal((nt, pts))
    a = np.linspace(0, nt - 1, nt)
    b = rng.uniform(-2, 2, pts)
    f = [rng.standard_normal((n, n, n)) for _ in range(2)]
    g = [rng.standard_normal((3, n, n, n)) for _ in range(2)]
    return {
        "mixed_norm(4,4)": lambda m: m.mixed_norm(src, 4.0, 4.0, 0.1, 0.01),
        "mixed_norm(2,inf)": lambda m: m.mixed_norm(src, 2.0, np.inf, 0.1, 0.01),
        "null_frame_gather": lambda m: m.null_frame_gather(src, a, b, True),
        "wave_products": lambda m: m.wave_products(f[0], f[1], g[0], g[1]),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':<20s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s}  max|diff|")
    for name, fn in cases(args.n).items():
        tp = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if _kernels is None:
            print(f"{name:<20s} {tp:11.2f} {'n/a':>12s}")
            continue
        tc = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat)) * 1e3
        rp, rc = fn(_kernels_py), fn(_kernels)
        diff = max(float(np.max(np.abs(np.asarray(x) - np.asarray(y)))) for x, y in
                   zip(rp if isinstance(rp, tuple) else (rp,), rc if isinstance(rc, tuple) else (rc,)))
        print(f"{name:<20s} {tp:11.2f} {tc:12.2f} {tp / tc:7.1f}x  {diff:.1e}")


if __name__ == "__main__":
    main()
