"""Compare the compiled decision kernel against the NumPy fallback.

Times the raw kernel on synthetic inputs at a few market sizes, then a
full simulation and a threaded ensemble through each backend. Run from
the repository root after installing the package:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 100x50 1000x200 --repeat 7
"""

import argparse
import statistics
import time

import numpy as np

from fashsim import kernel
from fashsim.engine import SimulationConfig, run, run_ensemble
from fashsim.graph import TopologySpec, build_random
from fashsim.model import MarketParams


def kernel_inputs(n, m, seed=0):
    rng = np.random.default_rng(np.random.PCG64(seed))
    graph = build_random(n, min(1.0, 8.0 / n), rng)
    return dict(
        liking=rng.random((n, m)),
        tolerance=1.0 - rng.random(n),
        advertisement=rng.random(m),
        pen=rng.random(m) * 0.5,
        nbr_counts=rng.integers(0, 5, size=(n, m)).astype(np.int64),
        degrees=graph.degrees.copy(),
        consumed=(rng.random((n, m)) < 0.3).astype(np.uint8),
        out=np.empty(n, dtype=np.int64),
        m=m,
    )


def time_call(fn, repeat):
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return min(samples), statistics.median(samples)


def bench_kernel(backend, n, m, repeat, inner=50):
    decide = kernel.get_decide(backend)
    arrs = kernel_inputs(n, m)

    def call():
        for _ in range(inner):
            decide(
                arrs["liking"], arrs["tolerance"], arrs["advertisement"],
                arrs["pen"], arrs["nbr_counts"], arrs["degrees"],
                arrs["consumed"], 0.95, True, arrs["m"], 0.0, False,
                arrs["out"],
            )

    best, med = time_call(call, repeat)
    return best / inner, med / inner


def sim_config(n, m, seed=1):
    return SimulationConfig(
        n_agents=n, m_initial=m, rounds=30,
        topology=TopologySpec(kind="ring", k=4),
        params=MarketParams(intro_period=6, intro_ads=(0.7,)),
        mode="fashion", seed=seed,
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", nargs="+", default=["100x50", "500x50", "1000x100"],
                        help="kernel sizes as AGENTSxITEMS")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--ensemble-runs", type=int, default=20)
    args = parser.parse_args()

    backends = kernel.available_backends()
    print("available backends:", ", ".join(backends))
    if "compiled" not in backends:
        print("note: compiled extension not built; timing the fallback only")

    print("\nraw kernel, one decision round (best / median per call):")
    for size in args.sizes:
        n, m = (int(v) for v in size.split("x"))
        line = [f"  {n:>5} agents x {m:>4} items:"]
        results = {}
        for b in backends:
            best, med = bench_kernel(b, n, m, args.repeat)
            results[b] = best
            line.append(f"{b} {best*1e6:8.1f} / {med*1e6:8.1f} us")
        if "compiled" in results and "python" in results:
            line.append(f"(compiled x{results['python']/results['compiled']:.1f})")
        print(" ".join(line))

    print("\nfull run, 30 rounds (best / median):")
    for n, m in ((100, 50), (500, 50)):
        cfg = sim_config(n, m)
        line = [f"  {n:>5} agents x {m:>4} items:"]
        results = {}
        for b in backends:
            best, med = time_call(lambda: run(cfg, backend=b), args.repeat)
            results[b] = best
            line.append(f"{b} {best*1e3:8.2f} / {med*1e3:8.2f} ms")
        if "compiled" in results and "python" in results:
            line.append(f"(compiled x{results['python']/results['compiled']:.1f})")
        print(" ".join(line))

    print(f"\nthreaded ensemble, {args.ensemble_runs} runs of 100x50 (best / median):")
    cfg = sim_config(100, 50)
    for b in backends:
        best, med = time_call(
            lambda: run_ensemble(cfg, args.ensemble_runs, backend=b), 3
        )
        print(f"  {b:>8}: {best:8.3f} / {med:8.3f} s")


if __name__ == "__main__":
    main()
