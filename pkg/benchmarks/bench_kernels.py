"""Benchmark the numba-compiled kernels against the pure-numpy fallbacks.

Run:  python benchmarks/bench_kernels.py [n]
"""

import sys
import time

import numpy as np

from contractkit import kernels


def timeit(fn, args, repeats=200):
    fn(*args)  # warm-up / JIT compile
    best = np.inf
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeats):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeats)
    return best


def main(n=4096):
    rng = np.random.default_rng(0)
    u = rng.standard_normal(n)
    v = rng.standard_normal(n)
    x = np.abs(u) + 0.5
    y = np.abs(v) + 0.5
    inv_h = float(n)
    inv_h2 = float(n) ** 2

    cases = [
        ("lap1d_periodic", (u, inv_h2)),
        ("lap1d_neumann", (u, inv_h2)),
        ("lap1d_dirichlet", (u, inv_h2)),
        ("burgers_rhs_centered", (u, inv_h, inv_h2, 0.01)),
        ("burgers_rhs_upwind", (u, inv_h, inv_h2, 0.01)),
        ("allen_cahn_rhs", (u, 0.5, inv_h2)),
        ("brusselator_rhs", (x, y, 1.0, 1.8, 0.001, 0.1, inv_h2)),
        ("lp_power_sum", (u, 3.0)),
        ("lp_sip_smooth", (u, v, 3.0)),
    ]

    print(f"kernel benchmark, n = {n}, active backend = {kernels.backend()}")
    if not kernels.USING_NUMBA:
        print("numba unavailable or disabled (CONTRACTKIT_NUMBA=0); "
              "timing the numpy path only")
    header = f"{'kernel':<26}{'numpy (us)':>12}{'numba (us)':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, args in cases:
        np_fn = getattr(kernels, name + "_numpy")
        t_np = timeit(np_fn, args) * 1e6
        if kernels.USING_NUMBA:
            jit_fn = getattr(kernels, name + "_jit")
            t_jit = timeit(jit_fn, args) * 1e6
            print(f"{name:<26}{t_np:>12.2f}{t_jit:>12.2f}{t_np / t_jit:>9.2f}x")
        else:
            print(f"{name:<26}{t_np:>12.2f}{'-':>12}{'-':>9}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 4096)
