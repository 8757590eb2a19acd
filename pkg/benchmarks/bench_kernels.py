#!/usr/bin/env python3
"""Benchmark the numba and numpy wavelet kernel paths against each other.

Runs the batched analysis/synthesis kernels on identical inputs, reports
per-call time and speedup, and checks the two paths agree.  numba timings
exclude JIT compilation (one warmup call per shape).

    python3 benchmarks/bench_kernels.py --batch 512 --length 768 --repeats 50
"""

import argparse
import time

import numpy as np

from wavehead import kernels
from wavehead.wavelet import make_filter_bank


def _time(fn, args, repeats):
    fn(*args)  # warmup (JIT compile / cache load)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--batch", type=int, default=512)
    ap.add_argument("--length", type=int, default=768)
    ap.add_argument("--repeats", type=int, default=50)
    ap.add_argument("--family", default="haar")
    args = ap.parse_args()

    if kernels.dwt_batch_numba is None:
        print("numba unavailable; nothing to compare")
        return 1

    fb = make_filter_bank(args.family)
    rng = np.random.default_rng(0)
    x = rng.normal(size=(args.batch, args.length))
    lo, hi = fb.lowpass, fb.highpass
    low, high = kernels.dwt_batch_numpy(x, lo, hi)

    rows = []
    for name, np_fn, nb_fn, call in (
        ("dwt", kernels.dwt_batch_numpy, kernels.dwt_batch_numba, (x, lo, hi)),
        ("idwt", kernels.idwt_batch_numpy, kernels.idwt_batch_numba,
         (low, high, lo, hi, args.length)),
    ):
        t_np = _time(np_fn, call, args.repeats)
        t_nb = _time(nb_fn, call, args.repeats)
        a, b = np_fn(*call), nb_fn(*call)
        if name == "dwt":
            diff = max(np.abs(a[0] - b[0]).max(), np.abs(a[1] - b[1]).max())
        else:
            diff = np.abs(a - b).max()
        rows.append((name, t_np, t_nb, t_np / t_nb, diff))

    print(f"batch={args.batch} length={args.length} family={fb.family} "
          f"repeats={args.repeats} (best-of)")
    print(f"{'kernel':6} {'numpy':>12} {'numba':>12} {'speedup':>8} {'max|diff|':>10}")
    for name, t_np, t_nb, speedup, diff in rows:
        print(f"{name:6} {t_np * 1e6:>10.1f}us {t_nb * 1e6:>10.1f}us "
              f"{speedup:>7.2f}x {diff:>10.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
