"""The numba kernels and the numpy fallback must agree exactly."""

import numpy as np
import pytest

from boolnl import kernels_nb as nb
from boolnl import kernels_np as npk
from boolnl.kernels import pair_tables, parity_table


def test_spectra_rows(rng):
    for n in (1, 3, 6, 8):
        bits = rng.integers(0, 2, (20, 1 << n), dtype=np.uint8)
        assert np.array_equal(nb.spectra_rows(bits), npk.spectra_rows(bits))


def test_spectrum_and_max_count(rng):
    bits = rng.integers(0, 2, 256, dtype=np.uint8)
    W1, W2 = np.empty(256, np.int32), np.empty(256, np.int32)
    nb.spectrum_into(bits, W1)
    npk.spectrum_into(bits, W2)
    assert np.array_equal(W1, W2)
    assert tuple(nb.max_count(W1)) == tuple(npk.max_count(W2))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_words_max_abs(n, rng):
    L = 1 << n
    hi = (1 << L) - 1 if L < 64 else np.iinfo(np.uint64).max
    words = rng.integers(0, hi, 3000, dtype=np.uint64, endpoint=True)
    assert np.array_equal(nb.words_max_abs(words, n), npk.words_max_abs(words, n))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_reach_patterns(n, rng):
    L = 1 << n
    words = rng.integers(0, (1 << L) - 1, 400, dtype=np.uint64, endpoint=True)
    par = parity_table(L)
    a = nb.reach_patterns(words, n, par)
    b = npk.reach_patterns(words, n, par)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def _drive(mod, bits, ops, f2, revert, randomized, depth, budget=4_000, key=12345):
    L = bits.shape[0]
    pi, pj = pair_tables(L)
    par = parity_table(L)
    b = bits.copy()
    W = np.empty(L, np.int32)
    mod.spectrum_into(b, W)
    best = np.empty(L, np.uint8)
    te, tm, tc = (np.empty(budget, np.int64) for _ in range(3))
    out = mod.ls_drive(b, W, np.array(ops, np.int64), budget, 1, f2, revert, depth,
                       randomized, key, pi, pj, par, best, te, tm, tc)
    k = int(out[1])
    return tuple(int(v) for v in out), best.tolist(), te[:k].tolist(), tm[:k].tolist(), tc[:k].tolist()


@pytest.mark.parametrize("f2", [False, True])
@pytest.mark.parametrize("revert", [False, True])
@pytest.mark.parametrize("randomized", [False, True])
def test_ls_drive(f2, revert, randomized, rng):
    for n, ops in ((4, [3, 2, 7]), (5, [7, 2]), (6, [2, 3])):
        bits = rng.integers(0, 2, 1 << n, dtype=np.uint8)
        assert _drive(nb, bits, ops, f2, revert, randomized, 0) == \
            _drive(npk, bits, ops, f2, revert, randomized, 0)
    bits = rng.integers(0, 2, 32, dtype=np.uint8)
    assert _drive(nb, bits, [3, 2], f2, True, randomized, 1) == \
        _drive(npk, bits, [3, 2], f2, True, randomized, 1)
