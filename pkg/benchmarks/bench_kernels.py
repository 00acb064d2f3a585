"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]

Prints one line per kernel with the best wall time for each backend and
the speed-up. Outputs of both backends are checked for equality first.
"""

import argparse
import time

import numpy as np

from floquet_clifford import _pykernels

try:
    from floquet_clifford import _ckernels
except ImportError:
    _ckernels = None


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(quick):
    rng = np.random.default_rng(0)
    scale = 1 if quick else 4
    n_mat = 2000 * scale
    L, N, R, t2 = 16, 4, 512 * scale, 32
    gates = _pykernels.sample_symplectic(2 * N, R * L, 11).reshape(R, L, 4 * N)
    u0 = np.zeros((R, L), dtype=np.uint64)
    u0[:, 0] = 1
    a = rng.integers(0, 1 << 16, size=(n_mat, 16), dtype=np.uint64)
    b = rng.integers(0, 1 << 16, size=(n_mat, 16), dtype=np.uint64)
    big = rng.integers(0, 2**63, size=(256, 64), dtype=np.uint64)
    return {
        f"sample_symplectic n=8 x{n_mat}": lambda k: k.sample_symplectic(8, n_mat, 5),
        f"evolve_sites L={L} N={N} R={R} t2={t2}": lambda k: k.evolve_sites(gates, u0, N, t2),
        f"batch_matmul 16x16 x{n_mat}": lambda k: k.batch_matmul(a, b, 16),
        f"batch_rank 16x16 x{n_mat}": lambda k: k.batch_rank(a, 16),
        "matmul_words 256x64 @ 64x63": lambda k: k.matmul_words(big, big[:64], 64),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled backend not built; run `pip install -e . --no-build-isolation`")
        return
    print(f"{'kernel':<42}{'cython s':>12}{'numpy s':>12}{'speed-up':>10}")
    for name, fn in cases(args.quick).items():
        if not np.array_equal(np.asarray(fn(_ckernels)), np.asarray(fn(_pykernels))):
            raise SystemExit(f"backend mismatch in {name}")
        tc = best_time(lambda: fn(_ckernels), args.repeat)
        tp = best_time(lambda: fn(_pykernels), args.repeat)
        print(f"{name:<42}{tc:>12.5f}{tp:>12.5f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
