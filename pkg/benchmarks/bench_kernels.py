"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--samples 1000000] [--repeat 3]

Each kernel is called once before timing so compilation is excluded, and
both backends must return identical arrays.
"""

import argparse
import time

import numpy as np

from sigkit import _accel, _kernels
from sigkit.structure import from_min_path_sets, k_out_of_n


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def bench_ranks(samples, repeat):
    phi1 = from_min_path_sets(4, [[1, 2]])
    phi2 = from_min_path_sets(4, [[2, 4], [3, 4]])
    tables = np.stack([phi1.table, phi2.table])
    x = np.random.default_rng(0).exponential(size=(samples, 4))
    _kernels.system_ranks_numba(tables, x[:10])
    t_np, a = best_of(lambda: _kernels.system_ranks_numpy(tables, x), repeat)
    t_nb, b = best_of(lambda: _kernels.system_ranks_numba(tables, x), repeat)
    assert np.array_equal(a, b)
    return f"system_ranks        N={samples:<9} n=4 ", t_np, t_nb


def bench_nested(n, repeat):
    outer, inner = k_out_of_n(n, 2).table, k_out_of_n(n, n - 1).table
    _kernels.nested_pair_counts_numba(outer, inner, n)
    t_np, a = best_of(lambda: _kernels.nested_pair_counts_numpy(outer, inner, n), repeat)
    t_nb, b = best_of(lambda: _kernels.nested_pair_counts_numba(outer, inner, n), repeat)
    assert np.array_equal(a, b)
    return f"nested_pair_counts  n={n:<11}", t_np, t_nb


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=1_000_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rows = [bench_ranks(args.samples, args.repeat)]
    rows += [bench_nested(n, args.repeat) for n in (8, 12, 16, 20)]
    print(f"{'kernel':<34} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8}")
    for label, t_np, t_nb in rows:
        print(f"{label:<34} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
