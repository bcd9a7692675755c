#!/usr/bin/env python3
"""Benchmark the compiled simulation kernel against the interpreted fallback.

Runs the identical workload (closed-loop ramp over the boutique topology) on
both backends, reports wall time and throughput, and verifies the outputs are
bit-identical.

    python benchmarks/compare_kernels.py [--horizon 240] [--peak-users 200]
"""

import argparse
import time

import scalerbench.engine.core as core_mod
from scalerbench.benchmark import load_benchmark
from scalerbench.data import data_path
from scalerbench.engine import kernel as default_kernel
from scalerbench.engine import load_interpreted_kernel


def run_scenario(kernel_module, topology, horizon_s, peak_users, seed=42):
    original = core_mod._k
    core_mod._k = kernel_module
    try:
        sim = core_mod.Simulation(topology, seed=seed)
        sim.configure_closed_loop(1.0)
        t0 = time.perf_counter()
        steps = 8
        for k in range(steps):
            sim.set_user_target(int(peak_users * (k + 1) / steps))
            sim.advance(horizon_s * (k + 1) / steps)
        sim.set_user_target(0)
        sim.advance(horizon_s + 30.0)
        wall = time.perf_counter() - t0
        totals = sim.request_totals()
        spans = sum(sim.span_stats(s)["completed"] for s in sim.service_names)
        return wall, totals, spans, sim.finished_records()
    finally:
        core_mod._k = original


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--horizon", type=float, default=240.0,
                        help="injection horizon in simulated seconds")
    parser.add_argument("--peak-users", type=int, default=200)
    args = parser.parse_args()

    topology = load_benchmark(data_path("benchmarks/boutique/manifest.json")).topology
    interpreted = load_interpreted_kernel()

    backends = [("interpreted", interpreted)]
    if default_kernel.KERNEL_COMPILED:
        backends.insert(0, ("compiled", default_kernel))
    else:
        print("note: compiled kernel not built; benchmarking interpreted only")

    results = {}
    for name, module in backends:
        wall, totals, spans, records = run_scenario(
            module, topology, args.horizon, args.peak_users)
        results[name] = (wall, totals, spans, records)
        print(f"{name:>12}: {wall:6.2f}s wall  "
              f"{totals['injected']:>7} requests  {spans:>8} spans  "
              f"{spans / wall:>10.0f} spans/s")

    if len(results) == 2:
        wall_c, totals_c, spans_c, recs_c = results["compiled"]
        wall_i, totals_i, spans_i, recs_i = results["interpreted"]
        assert totals_c == totals_i, "backends disagree on request totals"
        assert recs_c == recs_i, "backends disagree on request records"
        print(f"{'speedup':>12}: {wall_i / wall_c:6.2f}x  (outputs bit-identical)")


if __name__ == "__main__":
    main()
