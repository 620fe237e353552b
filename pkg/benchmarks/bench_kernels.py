"""Compare the compiled and pure-Python kernels on the hot paths.

Run:  python3 benchmarks/bench_kernels.py [--repeat N]

Each workload runs on both backends and reports the best wall time and
the speed-up.  Results are also checked to agree between backends.
"""
import argparse
import time

import numpy as np

from l1robust import _backend, lp_core


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def w_threshold(k):
    # bisection on rho as in critical_rho, strong mode, C = 2
    lo, hi = 1e-8, 1.0 / 3.0
    while hi - lo > 1e-5:
        mid = 0.5 * (lo + hi)
        if k.max_psi_net(mid, 0.5555, 2.0, 2, 1 - 1e-6, 512, 3, 1e-9)[1] < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def w_lp(k):
    lp_core.kernels = k
    rng = np.random.default_rng(0)
    A = rng.standard_normal((40, 80))
    x = np.zeros(80)
    x[:3] = 1.0
    sol = lp_core.solve_lp(lp_core.l1_min_as_lp(A, A @ x))
    return sol.objective_value


def w_jacobi(k):
    rng = np.random.default_rng(1)
    A = rng.standard_normal((60, 240))
    w, _, _ = k.jacobi_eigh(A @ A.T, 1e-14, 60)
    return float(np.sort(w)[0])


WORKLOADS = [
    ("threshold bisection (C=2, strong)", w_threshold),
    ("l1 decode LP 40x80", w_lp),
    ("Jacobi eigen 60x60", w_jacobi),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    compiled = _backend.compiled_kernels()
    py = _backend.python_kernels
    if compiled is None:
        print("compiled extension not built; only the Python backend is available")
    saved = lp_core.kernels
    print(f"{'workload':38s} {'python [s]':>11s} {'cython [s]':>11s} {'speed-up':>9s}  agree")
    try:
        for name, fn in WORKLOADS:
            tp, rp = _best(lambda: fn(py), args.repeat)
            if compiled is None:
                print(f"{name:38s} {tp:11.4f} {'-':>11s} {'-':>9s}")
                continue
            tc, rc = _best(lambda: fn(compiled), args.repeat)
            agree = abs(rp - rc) <= 1e-9 * max(1.0, abs(rp))
            print(f"{name:38s} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f}x  {agree}")
    finally:
        lp_core.kernels = saved


if __name__ == "__main__":
    main()
