"""Compare the compiled and numpy min-plus kernels, alone and inside a full DP solve.

    python3 benchmarks/bench_kernels.py [--repeats N]
"""
import argparse
import time

import numpy as np

from offload_opt import io as oio
from offload_opt import kernels
from offload_opt.parallel import QuantGrid, solve_parallel
from offload_opt.physical import ConcurrencyProfile


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_case(K, J, rng):
    tx = np.sort(rng.random(J))[::-1].copy()
    parent = np.minimum.accumulate(rng.random(K + 1)[::-1])[::-1].copy()
    return tx, parent, np.empty(K + 1), np.empty(K + 1, dtype=np.int64)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    impls = kernels.IMPLEMENTATIONS
    if "compiled" not in impls:
        print("compiled extension not built; only the python kernel is timed")

    print(f"{'case':<28}" + "".join(f"{name:>14}" for name in impls) + f"{'speedup':>10}")
    for K, J in ((100, 20), (400, 100), (1600, 400)):
        tx, parent, oc, oj = kernel_case(K, J, rng)
        t = {name: best_of(lambda: fn(tx, 2, parent, oc, oj), args.repeats * 20) for name, fn in impls.items()}
        _row(f"minplus K={K} J={J}", t)

    prof = oio.load_profile(oio.default_profile_path())
    g = oio.load_graph(oio.fixture_path("fig8"))
    conc = ConcurrencyProfile.uniform(1)
    for lmax, eps in ((4.0, 0.1), (8.0, 0.05)):
        t = {}
        for name, fn in impls.items():
            kernels.minplus_select = fn
            t[name] = best_of(lambda: solve_parallel(g, prof, conc, QuantGrid(eps, lmax)), args.repeats)
        _row(f"fig8 solve L={lmax} eps={eps}", t)


def _row(label, t):
    cells = "".join(f"{v * 1e3:>12.3f}ms" for v in t.values())
    speed = f"{t['python'] / t['compiled']:>9.1f}x" if "compiled" in t else ""
    print(f"{label:<28}{cells}{speed}")


if __name__ == "__main__":
    main()
