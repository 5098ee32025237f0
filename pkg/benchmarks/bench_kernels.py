"""Benchmark the compiled day kernel against the pure-Python fallback.

Runs the same seeded simulation through both kernels, verifies the
outputs are bit-identical, and reports wall time and throughput.

    python benchmarks/bench_kernels.py [--consumers N] [--cycles N]
                                       [--days N] [--full]

``--full`` uses the complete experiment scale (600 consumers, 60 cycles
of 30 days); expect the Python kernel to take a few minutes there.
"""

from __future__ import annotations

import argparse
import tempfile
import time
from pathlib import Path

import numpy as np

from ecosim import synthdata
from ecosim.engine import run_experiment
from ecosim.ingest import build_population
from ecosim.kernels import available_kernels
from ecosim.model import SimConfig


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--consumers", type=int, default=200)
    parser.add_argument("--cycles", type=int, default=6)
    parser.add_argument("--days", type=int, default=10)
    parser.add_argument("--data", default=None, help="dataset directory (default: generate synthetic)")
    parser.add_argument("--full", action="store_true", help="full experiment scale")
    args = parser.parse_args()

    if args.full:
        args.consumers, args.cycles, args.days = 600, 60, 30

    if args.data:
        data_dir = Path(args.data)
    else:
        data_dir = Path(tempfile.mkdtemp(prefix="ecosim_bench_")) / "data"
        print(f"generating synthetic dataset in {data_dir} ...")
        synthdata.generate(data_dir)

    config = SimConfig(
        consumer_sample_size=args.consumers,
        cycles=args.cycles,
        days_per_cycle=args.days,
        selection_model="threshold",
        seed=42,
    )
    population = build_population(data_dir, config)
    consumer_days = args.consumers * args.cycles * args.days
    print(
        f"scale: {args.consumers} consumers x {args.cycles} cycles x {args.days} days "
        f"= {consumer_days:,} consumer-days\n"
    )

    results = {}
    timings = {}
    for name in available_kernels():
        t0 = time.perf_counter()
        results[name] = run_experiment(config, population, kernel=name)
        timings[name] = time.perf_counter() - t0
        rate = consumer_days / timings[name]
        print(f"{name:>8}: {timings[name]:8.2f}s   {rate:12,.0f} consumer-days/s")

    if len(results) == 2:
        a, b = results["python"], results["cython"]
        identical = (
            np.array_equal(a.out_items, b.out_items)
            and a.out_util.tobytes() == b.out_util.tobytes()
            and np.array_equal(a.out_click, b.out_click)
            and a.switch_events == b.switch_events
        )
        speedup = timings["python"] / timings["cython"]
        print(f"\nbit-identical outputs: {identical}")
        print(f"speedup: {speedup:.1f}x")
        if not identical:
            return 1
    else:
        print("\ncompiled kernel not built; only the Python kernel was timed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
