"""Time the numba kernels against their numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--size 256] [--repeat 5]
"""

import argparse
import time

import numpy as np

from dirac_forge.kernels import _numba, _numpy


def best_time(fn, repeat):
    fn()  # warm-up, includes JIT compilation for the numba path
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def workloads(size, rng):
    # derivative kernels take a (pre, n, post) block; differentiate the middle axis
    field = rng.normal(size=(size, size, 4)) + 1j * rng.normal(size=(size, size, 4))
    mats = rng.normal(size=(size * size, 8, 8)) + 1j * rng.normal(size=(size * size, 8, 8))
    vecs = rng.normal(size=(size * size, 8)) + 1j * rng.normal(size=(size * size, 8))
    nodes = 16 * size
    path = rng.normal(size=(nodes + 1, 2))
    base = rng.normal(size=(nodes, 2, 2))
    g_mid = np.einsum("kij,klj->kil", base, base) + 2 * np.eye(2)
    dg_mid = rng.normal(size=(nodes, 2, 2, 2))
    dg_mid = 0.5 * (dg_mid + np.swapaxes(dg_mid, -1, -2))
    h = 2 * np.pi / size
    return {
        "diff_axis order 2": lambda mod: mod.diff_axis(field, h, 2, True),
        "diff_axis order 4": lambda mod: mod.diff_axis(field, h, 4, True),
        "node_matmul 8x8": lambda mod: mod.node_matmul(mats, mats),
        "node_matvec 8x8": lambda mod: mod.node_matvec(mats, vecs),
        "geodesic_energy_grad": lambda mod: mod.geodesic_energy_grad(path, g_mid, dg_mid, 1.0 / nodes),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=256, help="grid side length")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<24}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, call in workloads(args.size, rng).items():
        t_numba = best_time(lambda: call(_numba), args.repeat)
        t_numpy = best_time(lambda: call(_numpy), args.repeat)
        print(f"{name:<24}{1e3 * t_numba:>12.3f}{1e3 * t_numpy:>12.3f}{t_numpy / t_numba:>10.2f}")


if __name__ == "__main__":
    main()
