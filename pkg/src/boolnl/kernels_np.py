"""Pure-numpy kernels (the fallback backend).

Vectorised along the spectrum axis; the outer search loops run in plain
Python, so this path is correct everywhere but much slower on the
neighbourhood scans.
"""

import sys
from functools import lru_cache

import numpy as np

from ._lsdriver import build_ls_driver


@lru_cache(maxsize=None)
def _arange(L):
    a = np.arange(L, dtype=np.int64)
    a.setflags(write=False)
    return a


def fwht_inplace(x):
    L = x.shape[-1]
    lead = x.shape[:-1]
    h = 1
    while h < L:
        v = x.reshape(lead + (L // (2 * h), 2, h))
        a = v[..., 0, :].copy()
        v[..., 0, :] += v[..., 1, :]
        v[..., 1, :] = a - v[..., 1, :]
        h *= 2


def spectrum_into(bits, W):
    W[:] = 1 - 2 * bits.astype(np.int32)
    fwht_inplace(W)


def spectra_rows(bits2d):
    out = 1 - 2 * np.asarray(bits2d, dtype=np.int32)
    fwht_inplace(out)
    return out


def max_count(W):
    A = np.abs(W)
    m = int(A.max())
    return m, int(np.count_nonzero(A == m))


def _chi(par, L, i):
    return 1 - 2 * par[_arange(L) & i].astype(np.int64)


def _judge(Wn, M, cnt, f2):
    m2, c2 = max_count(Wn)
    better = m2 < M or (f2 and m2 == M and c2 < cnt)
    return better, m2, c2


def eval_flip1(W, par, bits, i, M, cnt, f2):
    s = 1 - 2 * int(bits[i])
    return _judge(W - 2 * s * _chi(par, W.shape[0], i), M, cnt, f2)


def eval_flip2(W, par, bits, i, j, M, cnt, f2):
    L = W.shape[0]
    si = 1 - 2 * int(bits[i])
    sj = 1 - 2 * int(bits[j])
    return _judge(W - 2 * si * _chi(par, L, i) - 2 * sj * _chi(par, L, j), M, cnt, f2)


def eval_rot(bits, r, M, cnt, f2, wbuf, bbuf):
    bbuf[:] = np.roll(bits, -r)
    spectrum_into(bbuf, wbuf)
    return _judge(wbuf, M, cnt, f2)


def apply_flip1(W, par, bits, i):
    s = 1 - 2 * int(bits[i])
    W -= (2 * s * _chi(par, W.shape[0], i)).astype(W.dtype)
    bits[i] ^= 1


def apply_flip2(W, par, bits, i, j):
    apply_flip1(W, par, bits, i)
    apply_flip1(W, par, bits, j)


def _unpack_words(words, n):
    L = 1 << n
    shifts = np.arange(L, dtype=np.uint64)
    return ((np.asarray(words, dtype=np.uint64)[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)


def words_max_abs(words, n, chunk=1 << 14):
    words = np.asarray(words, dtype=np.uint64)
    out = np.empty(words.shape[0], np.int32)
    for s in range(0, words.shape[0], chunk):
        W = spectra_rows(_unpack_words(words[s:s + chunk], n))
        out[s:s + chunk] = np.abs(W).max(axis=1)
    return out


def reach_patterns(words, n, par, chunk=1 << 10):
    L = 1 << n
    words = np.asarray(words, dtype=np.uint64)
    B = words.shape[0]
    maxabs = np.empty(B, np.int32)
    pattern = np.zeros(B, np.uint8)
    ar = _arange(L)
    chi = (1 - 2 * par[ar[:, None] & ar[None, :]].astype(np.int32))  # chi[i, a]
    for s in range(0, B, chunk):
        bits = _unpack_words(words[s:s + chunk], n)
        sgn = 1 - 2 * bits.astype(np.int32)
        W = spectra_rows(bits)
        M = np.abs(W).max(axis=1)
        maxabs[s:s + chunk] = M
        rot = np.zeros(bits.shape[0], bool)
        for r in range(1, L):
            Wr = spectra_rows(np.roll(bits, -r, axis=1))
            rot |= np.abs(Wr).max(axis=1) < M
        one = np.zeros(bits.shape[0], bool)
        for i in range(L):
            Wn = W - 2 * sgn[:, i, None] * chi[i]
            one |= np.abs(Wn).max(axis=1) < M
        two = np.zeros(bits.shape[0], bool)
        for i in range(L):
            Wi = W - 2 * sgn[:, i, None] * chi[i]
            for j in range(i + 1, L):
                Wn = Wi - 2 * sgn[:, j, None] * chi[j]
                two |= np.abs(Wn).max(axis=1) < M
        pattern[s:s + chunk] = (rot.astype(np.uint8) << 2) | (one.astype(np.uint8) << 1) | two
    return maxabs, pattern


ls_drive = build_ls_driver(sys.modules[__name__], lambda fn: fn)
