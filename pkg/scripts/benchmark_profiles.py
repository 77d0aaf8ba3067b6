#!/usr/bin/env python3
"""Time the fast profile routes against the quadratic reference.

Generates random continuous (gaussian walk) and discrete (fair binary)
series at a range of lengths, then times the fast route and, up to
--brute-limit, the reference route. Reports the best of --repeat runs
per cell. Reference timings at large n dominate the script's runtime.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from procmp.distances import Channel
from procmp.profile import mp_brute, mp_hamming_fast, mp_znorm_fast


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def make_channel(metric: str, n: int, rng) -> Channel:
    if metric == "znorm":
        return Channel("walk", np.cumsum(rng.normal(size=n)))
    return Channel("state", rng.integers(0, 2, size=n).astype(float), "discrete")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--sizes",
        default="2000,4000,8000,16000,32000",
        help="comma-separated series lengths",
    )
    parser.add_argument("-m", "--window", type=int, default=100)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument(
        "--brute-limit",
        type=int,
        default=8000,
        help="skip the reference route above this length",
    )
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    sizes = [int(s) for s in args.sizes.split(",") if s]
    rng = np.random.default_rng(args.seed)
    fast_routes = {"znorm": mp_znorm_fast, "hamming": mp_hamming_fast}

    print(f"window={args.window} repeat={args.repeat} (seconds, best of repeat)")
    print(f"{'metric':8s} {'n':>7s} {'fast':>9s} {'reference':>10s} {'speedup':>8s}")
    for metric, fast in fast_routes.items():
        for n in sizes:
            ch = make_channel(metric, n, rng)
            t_fast = best_time(lambda: fast(ch, args.window), args.repeat)
            if n <= args.brute_limit:
                t_ref = best_time(
                    lambda: mp_brute(ch, args.window, metric), args.repeat
                )
                ref_s, ratio = f"{t_ref:10.4f}", f"{t_ref / t_fast:7.1f}x"
            else:
                ref_s, ratio = f"{'skipped':>10s}", f"{'-':>8s}"
            print(f"{metric:8s} {n:7d} {t_fast:9.4f} {ref_s} {ratio}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
