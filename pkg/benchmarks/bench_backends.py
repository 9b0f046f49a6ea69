"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_backends.py [--repeat 3] [--quick]

Both kernel modules are imported directly, so the ``BOOLNL_BACKEND`` flag
does not matter here.  Each row reports the best of ``--repeat`` timings
after one warm-up call (which also triggers numba compilation).
"""

import argparse
import time

import numpy as np

from boolnl import kernels_nb, kernels_np
from boolnl.kernels import pair_tables, parity_table


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def ls_case(mod, n, budget, seed=0):
    L = 1 << n
    par = parity_table(L)
    pi, pj = pair_tables(L)
    ops = np.array([3, 2], np.int64)          # two-bit flip, then bit flip
    rng = np.random.default_rng(seed)
    bits0 = rng.integers(0, 2, L, dtype=np.uint8)

    def run():
        bits = bits0.copy()
        W = np.empty(L, np.int32)
        mod.spectrum_into(bits, W)
        out = np.empty(L, np.uint8)
        t = [np.empty(budget + 1, np.int64) for _ in range(3)]
        return mod.ls_drive(bits, W, ops, budget, 1, True, False, 0, True, 12345,
                            pi, pj, par, out, *t)
    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args()
    scale = 8 if args.quick else 1
    rng = np.random.default_rng(1)

    words4 = np.arange(1 << 16, dtype=np.uint64)[: (1 << 16) // scale]
    words5 = rng.integers(0, 1 << 32, 20_000 // scale, dtype=np.uint64)
    bits8 = rng.integers(0, 2, (4096 // scale, 256), dtype=np.uint8)
    budget = 20_000 // scale

    cases = [
        ("spectra_rows n=8", lambda m: m.spectra_rows(bits8)),
        ("words_max_abs n=4 (all)", lambda m: m.words_max_abs(words4, 4)),
        ("reach_patterns n=4", lambda m: m.reach_patterns(words4[:4096 // scale], 4, parity_table(16))),
        ("reach_patterns n=5", lambda m: m.reach_patterns(words5[:2000 // scale], 5, parity_table(32))),
        (f"ls_drive n=8 budget={budget}", None),
    ]
    print(f"{'kernel':32s} {'numba s':>10s} {'numpy s':>10s} {'speed-up':>9s}")
    for name, fn in cases:
        if fn is None:
            t_nb = best_of(ls_case(kernels_nb, 8, budget), args.repeat)
            t_np = best_of(ls_case(kernels_np, 8, budget), 1)
        else:
            t_nb = best_of(lambda: fn(kernels_nb), args.repeat)
            t_np = best_of(lambda: fn(kernels_np), args.repeat)
        print(f"{name:32s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
