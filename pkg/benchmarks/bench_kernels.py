"""Time the numba and numpy kernel backends on representative workloads.

Usage: python benchmarks/bench_kernels.py [--n 4096] [--repeat 3]
"""

import argparse
import time

import numpy as np

from twistlab import kernels
from twistlab._accel import NUMBA_AVAILABLE
from twistlab.periodic import standard_phi


def _time(func, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = func()
        best = min(best, time.perf_counter() - t)
    return best, out


def workloads(n):
    phi = standard_phi(0.2, n)
    disp = 0.38 + phi.values
    curv = phi.curv
    xs = np.arange(n) / n
    psi = np.zeros(n)
    return {
        "orbit 2e5 steps (cubic)": lambda: kernels.orbit_endpoints(disp, curv, 0.0, 200_000),
        "orbit 2e5 steps (linear)": lambda: kernels.orbit_endpoints(disp, kernels.NO_CURV, 0.0, 200_000),
        "iterate_many n pts x 20": lambda: kernels.iterate_many(disp, curv, xs, 20),
        "push_graph (cubic)": lambda: kernels.push_graph(psi, curv * 0.0, phi.values, curv, 0.25, 0.38),
        "attractor cloud 1024 x 60": lambda: kernels.attractor_cloud(
            phi.values, curv, 0.25, 0.38, 0.0, xs[::4], np.zeros(n // 4), 60, 54, n // 8
        ),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if NUMBA_AVAILABLE else [])
    print(f"{'workload':32s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speedup':>10s}")
    for name, func in workloads(args.n).items():
        times = {}
        results = {}
        for b in backends:
            kernels.set_backend(b)
            if b == "numba":
                func()  # compile
            times[b], results[b] = _time(func, args.repeat)
        row = f"{name:32s}" + "".join(f"{times[b]:12.4f}" for b in backends)
        if "numba" in times:
            row += f"{times['numpy'] / times['numba']:10.1f}x"
        print(row)
    kernels.set_backend("numba" if NUMBA_AVAILABLE else "numpy")


if __name__ == "__main__":
    main()
