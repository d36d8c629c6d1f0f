"""Throughput comparison: compiled kernels vs the pure-NumPy fallback.

Runs the same workloads in two fresh subprocesses — one with
ARBORTOPO_DISABLE_NUMBA=0 (default compiled path) and one with =1 — and
prints a side-by-side table with speedups. Fresh processes are required
because the backend is chosen at import time.

    python3 benchmarks/bench_kernels.py [--small-trees 20000] [--big-trees 500]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def payload(args) -> dict:
    from arbortopo import _kernels
    from arbortopo.generator import BranchModel, simulate_population_stats

    results = {"backend": "numba" if _kernels.USING_NUMBA else "pure-numpy"}

    # warm up (JIT compilation on the compiled path)
    _kernels.uniform_block(1, 1000)
    simulate_population_stats(BranchModel.homogeneous(0.3), 10, 0)

    t0 = time.perf_counter()
    _kernels.uniform_block(12345, args.block)
    dt = time.perf_counter() - t0
    results["uniform_draws_per_s"] = args.block / dt

    model = BranchModel.homogeneous(0.44)
    t0 = time.perf_counter()
    stats = simulate_population_stats(model, args.small_trees, 1)
    dt = time.perf_counter() - t0
    nodes = float((2 * stats[:, 0] + 2).sum())
    results["small_trees_per_s"] = args.small_trees / dt
    results["small_nodes_per_s"] = nodes / dt

    model = BranchModel.inhomogeneous(0.206, 0.855, 0.409)
    t0 = time.perf_counter()
    stats = simulate_population_stats(model, args.big_trees, 2)
    dt = time.perf_counter() - t0
    nodes = float((2 * stats[:, 0] + 2).sum())
    results["big_trees_per_s"] = args.big_trees / dt
    results["big_nodes_per_s"] = nodes / dt
    return results


ROWS = [
    ("uniform draws/s", "uniform_draws_per_s"),
    ("small trees/s (p=0.44)", "small_trees_per_s"),
    ("small nodes/s", "small_nodes_per_s"),
    ("large trees/s (mean ~440 nodes)", "big_trees_per_s"),
    ("large nodes/s", "big_nodes_per_s"),
]


def orchestrate(args) -> None:
    runs = {}
    for disable in ("0", "1"):
        env = dict(os.environ,
                   ARBORTOPO_DISABLE_NUMBA=disable,
                   _ARBORTOPO_BENCH_PAYLOAD="1")
        cmd = [sys.executable, os.path.abspath(__file__),
               "--block", str(args.block),
               "--small-trees", str(args.small_trees),
               "--big-trees", str(args.big_trees)]
        out = subprocess.run(cmd, env=env, capture_output=True, text=True,
                             check=True)
        res = json.loads(out.stdout)
        runs[res["backend"]] = res
    fast, slow = runs["numba"], runs["pure-numpy"]
    name_w = max(len(label) for label, _ in ROWS)
    print(f"{'workload':<{name_w}}  {'compiled':>12}  {'pure-numpy':>12}  "
          f"{'speedup':>8}")
    for label, key in ROWS:
        ratio = fast[key] / slow[key]
        print(f"{label:<{name_w}}  {fast[key]:>12.3g}  {slow[key]:>12.3g}  "
              f"{ratio:>7.1f}x")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--block", type=int, default=2_000_000,
                    help="uniform draws per timing run")
    ap.add_argument("--small-trees", type=int, default=20_000)
    ap.add_argument("--big-trees", type=int, default=500)
    args = ap.parse_args()
    if os.environ.get("_ARBORTOPO_BENCH_PAYLOAD") == "1":
        print(json.dumps(payload(args)))
    else:
        orchestrate(args)


if __name__ == "__main__":
    main()
