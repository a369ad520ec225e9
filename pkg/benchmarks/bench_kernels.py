"""Timings of the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 20]
"""
import argparse
import time

import numpy as np

from equimesh import kernels
from equimesh.grid import ComputationalGrid, make_uniform_mesh
from equimesh.monitor import MonitorParams, eval_u
from equimesh.schwarz import SchwarzConfig, schwarz_iterate, solve_single_domain


def best_of(fn, repeat):
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    return min(ts)


def kernel_cases(n):
    g = ComputationalGrid(n, n)
    m = make_uniform_mesh(g)
    rng = np.random.default_rng(0)
    X = np.ascontiguousarray(m.x + 0.2 * g.d_xi * rng.uniform(-1, 1, m.shape))
    Y = np.ascontiguousarray(m.y + 0.2 * g.d_eta * rng.uniform(-1, 1, m.shape))
    U = eval_u("boundary-layer", X, Y)
    size = 2 * n * n
    A = rng.standard_normal((size, size)) + size * np.eye(size)
    b = rng.standard_normal(size)

    def metric(mod):
        return lambda: mod.nodal_metric(X, Y, U, g.d_xi, g.d_eta, 0.7, 0.05, 1e-12)

    def fluxes(mod):
        m11, m12, m22, _ = mod.nodal_metric(X, Y, U, g.d_xi, g.d_eta, 0.7, 0.05, 1e-12)
        return lambda: mod.half_fluxes(X, Y, m11, m12, m22, g.d_xi, g.d_eta)

    def lu(mod):
        def run():
            LU, piv, _ = mod.lu_factor(A, 1e-300)
            mod.lu_solve(LU, piv, b)
        return run

    return [(f"nodal_metric {n}x{n}", metric), (f"half_fluxes {n}x{n}", fluxes),
            (f"lu factor+solve {size}", lu)]


def solve_cases():
    def single():
        solve_single_domain(ComputationalGrid(18, 18), MonitorParams(0.7, 0.05))

    def schwarz():
        schwarz_iterate(SchwarzConfig(kind="linear-robin", p=2.0), use_reference=False)

    return [("single-domain solve 18x18", single), ("linear Robin Schwarz 12x12", schwarz)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--n", type=int, default=18)
    args = ap.parse_args()
    mods = kernels.backends()
    names = sorted(mods)
    print(f"{'case':32s}" + "".join(f"{nm:>12s}" for nm in names) + "     speedup")
    for label, make in kernel_cases(args.n):
        ts = {nm: best_of(make(mods[nm]), args.repeat) for nm in names}
        row = "".join(f"{ts[nm] * 1e3:10.3f}ms" for nm in names)
        sp = f"{ts['python'] / ts['cython']:10.1f}x" if "cython" in ts else ""
        print(f"{label:32s}{row}{sp}")
    for label, fn in solve_cases():
        ts = {}
        for nm in names:
            prev = kernels.use(nm)
            try:
                ts[nm] = best_of(fn, max(1, args.repeat // 10))
            finally:
                kernels.use(prev)
        row = "".join(f"{ts[nm] * 1e3:10.1f}ms" for nm in names)
        sp = f"{ts['python'] / ts['cython']:10.1f}x" if "cython" in ts else ""
        print(f"{label:32s}{row}{sp}")


if __name__ == "__main__":
    main()
