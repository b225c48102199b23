#!/usr/bin/env python3
"""Compare the numba and numpy theta-moment kernels.

Usage:
    python benchmarks/bench_theta.py [--points 2000] [--repeat 5]

Reports the best-of-N wall time for each kernel and the max relative
difference between them.  The first numba call (compilation) is timed
separately.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from elltriv import _jit


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--nterms", type=int, default=12)
    parser.add_argument("--kmax", type=int, default=4)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(0)
    tau = 0.3 + 0.8j
    z = rng.random(args.points) + tau * rng.random(args.points)
    call = (z, tau, 0.5, args.nterms, args.kmax)

    ref = _jit.theta_moments_numpy(*call)
    t_np = best_of(lambda: _jit.theta_moments_numpy(*call), args.repeat)
    print(f"points={args.points} nterms={args.nterms} kmax={args.kmax}")
    print(f"numpy : {t_np * 1e3:9.3f} ms")
    if _jit.theta_moments_numba is None:
        print("numba : unavailable (not installed or ELLTRIV_DISABLE_NUMBA set)")
        return 0
    t0 = time.perf_counter()
    out = _jit.theta_moments_numba(*call)
    t_first = time.perf_counter() - t0
    t_nb = best_of(lambda: _jit.theta_moments_numba(*call), args.repeat)
    diff = float(np.max(np.abs(out - ref)) / np.max(np.abs(ref)))
    print(f"numba : {t_nb * 1e3:9.3f} ms (first call incl. compile {t_first * 1e3:.1f} ms)")
    print(f"speedup {t_np / t_nb:.2f}x, max relative difference {diff:.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
