#!/usr/bin/env python3
"""Benchmark the JIT kernels against the pure numpy/scipy fallbacks.

The numba/fallback switch is decided at import time from the environment,
so this script re-runs itself in a subprocess with
PWEXPAND_DISABLE_NUMBA=1 to time the other path, then prints a speedup
table and optionally writes the raw numbers as JSON.

Usage:
    python3 benchmarks/bench_kernels.py [--json OUT.json] [--repeat K]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_benchmarks(repeat: int) -> dict:
    from pwexpand import kernels

    kernels.warmup_jit()
    rng = np.random.default_rng(42)

    results = {"numba_enabled": kernels.NUMBA_ENABLED, "cases": {}}

    values = rng.standard_normal(1 << 20)
    for half in (16, 1024):
        name = f"sliding_minmax(n=2^20, half={half})"
        results["cases"][name] = _time(
            lambda: kernels.sliding_minmax(values, half), repeat)

    state = np.array([1.0, 1.0, 1.0])
    name = "lorenz_rk4(2e6 steps)"
    results["cases"][name] = _time(
        lambda: kernels.lorenz_rk4(state, 10.0, 28.0, 8.0 / 3.0, 0.001,
                                   2_000_000), repeat)
    return results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--json", default=None, help="write raw timings here")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--single", action="store_true",
                        help="time only the current import mode and dump JSON "
                             "to stdout (used by the subprocess re-run)")
    args = parser.parse_args()

    if args.single:
        json.dump(run_benchmarks(args.repeat), sys.stdout)
        return 0

    here = run_benchmarks(args.repeat)
    mode = "numba" if here["numba_enabled"] else "fallback"

    env = dict(os.environ)
    env["PWEXPAND_DISABLE_NUMBA"] = "1" if here["numba_enabled"] else "0"
    other_raw = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--single",
         "--repeat", str(args.repeat)],
        env=env, capture_output=True, text=True, check=True).stdout
    other = json.loads(other_raw)
    other_mode = "numba" if other["numba_enabled"] else "fallback"

    if mode == "numba":
        jit, plain = here, other
    else:
        jit, plain = other, here

    width = max(len(k) for k in here["cases"])
    print(f"{'kernel':<{width}}  {'numba':>10}  {'fallback':>10}  {'speedup':>8}")
    for name in here["cases"]:
        a = jit["cases"][name]
        b = plain["cases"][name]
        print(f"{name:<{width}}  {a:>9.4f}s  {b:>9.4f}s  {b / a:>7.1f}x")

    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"numba": jit, "fallback": plain}, fh, indent=2)
        print(f"raw timings -> {args.json}")
    if mode == other_mode:
        print("warning: both runs used the same mode (numba unavailable?)",
              file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
