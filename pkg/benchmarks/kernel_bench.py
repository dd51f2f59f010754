"""Timing comparison of the compiled and pure-NumPy kernels.

Runs the same workloads against both backends and prints a small table.
The pure backend is loaded in a subprocess with ``PHASELOCK_PURE=1`` so the
two measurements come from identically configured fresh interpreters.

Usage: python3 benchmarks/kernel_bench.py [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys
import time

_WORKLOADS = """
import json
import time

import numpy as np

from phaselock import _kernels
from phaselock.coupling import SineCoupling, make_banded, response_from_coupling
from phaselock.dynamics import PhaseModel, PulseModel, integrate, simulate_pulse
from phaselock.graph import complete_graph, ring_graph


def time_best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(repeat):
    rng = np.random.default_rng(0)
    results = {"backend": _kernels.BACKEND, "timings": {}}

    # dense phase integration: complete graph, one coupling everywhere
    n = 60
    model = PhaseModel(complete_graph(n), SineCoupling(1.0), 1.0 / n)
    phi0 = rng.uniform(0.0, 2.0 * np.pi, n)
    model.compiled()
    results["timings"]["phase complete N=60, 40k steps"] = time_best(
        lambda: integrate(model, phi0, h=0.01, t_end=400.0, record_every=100), repeat
    )

    # sparse phase integration with the banded (piecewise) coupling
    n = 200
    ring = PhaseModel(ring_graph(n), make_banded(0.5), 0.1)
    phi1 = rng.uniform(0.0, 2.0 * np.pi, n)
    ring.compiled()
    results["timings"]["phase ring N=200 banded, 20k steps"] = time_best(
        lambda: integrate(ring, phi1, h=0.01, t_end=200.0, record_every=100), repeat
    )

    # event-driven pulse simulation on a complete graph with delays
    n = 45
    g = complete_graph(n)
    resp = response_from_coupling(SineCoupling(1.0), 2.0 * np.pi)
    delays = rng.uniform(0.1, 0.3, g.n_edges)
    pm = PulseModel(g, resp, 4e-3, delays=delays)
    theta0 = rng.uniform(0.0, 2.0 * np.pi, n)
    pm.compiled()
    results["timings"]["pulse complete N=45, t=300"] = time_best(
        lambda: simulate_pulse(pm, theta0, 300.0), repeat
    )

    print(json.dumps(results))


main({repeat})
"""


def run_backend(pure, repeat):
    env = dict(os.environ)
    env["PHASELOCK_PURE"] = "1" if pure else "0"
    proc = subprocess.run(
        [sys.executable, "-c", _WORKLOADS.replace("{repeat}", str(repeat))],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3, help="best-of-k timing")
    args = parser.parse_args()

    t0 = time.perf_counter()
    compiled = run_backend(pure=False, repeat=args.repeat)
    pure = run_backend(pure=True, repeat=args.repeat)
    if compiled["backend"] != "compiled":
        print("note: compiled extension unavailable; comparing pure against itself")

    width = max(len(k) for k in pure["timings"])
    print(f"{'workload':<{width}}  {'compiled':>10}  {'pure':>10}  speedup")
    for key in pure["timings"]:
        tc = compiled["timings"][key]
        tp = pure["timings"][key]
        print(f"{key:<{width}}  {tc:>9.3f}s  {tp:>9.3f}s  {tp / tc:>6.1f}x")
    print(f"(best of {args.repeat}; total wall time {time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
