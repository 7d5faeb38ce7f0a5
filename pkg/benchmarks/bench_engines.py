#!/usr/bin/env python3
"""Timing comparison of the simulation kernels (compiled vs pure Python).

Runs the same seeded batches through every available kernel, checks that
the outputs agree bit for bit, and reports replications per second.

    python benchmarks/bench_engines.py --reps 100000
"""

import argparse
import time

import numpy as np

from ppsgame.presets import own_task_parallel, two_task_line, uniform_line
from ppsgame.sim import WithholdAll
from ppsgame.sim.engine import available_engines, batch_samples


def scenarios():
    yield "line m=6 n=3, all sharing", uniform_line(6, 3), None
    yield "parallel m=4 own-task rates, all sharing", own_task_parallel(4), None
    yield (
        "two-task line, one withholder",
        two_task_line(1.0, 5.0),
        {"a1": WithholdAll()},
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    engines = available_engines()
    print(f"kernels: {', '.join(engines)}   reps per scenario: {args.reps}")
    if "compiled" not in engines:
        print("note: compiled kernel unavailable; timing the fallback only")
    print()

    for name, game, profile in scenarios():
        print(name)
        timings = {}
        results = {}
        for engine in engines:
            start = time.perf_counter()
            _, makespans, claims = batch_samples(
                game, profile, args.reps, args.seed, engine=engine
            )
            elapsed = time.perf_counter() - start
            timings[engine] = elapsed
            results[engine] = (makespans, claims)
            print(
                f"  {engine:>8}: {elapsed:8.3f} s   {args.reps / elapsed:12,.0f} reps/s"
                f"   mean makespan {float(makespans.mean()):.6f}"
            )
        if len(engines) == 2:
            same = all(
                np.array_equal(results["python"][i], results["compiled"][i])
                for i in (0, 1)
            )
            speedup = timings["python"] / timings["compiled"]
            print(f"  bit-identical outputs: {same}   speedup: {speedup:.1f}x")
        print()


if __name__ == "__main__":
    main()
