"""numba-compiled kernels.

Same contracts as :mod:`boolnl.kernels_np`; the test-suite runs both and
checks they agree.  Truth tables are ``uint8`` arrays of 0/1, spectra are
``int32``, packed words are ``uint64`` with bit ``k`` holding ``f(k)``.
"""

import sys

import numpy as np
from numba import njit, prange

from ._lsdriver import build_ls_driver


@njit(cache=True)
def fwht_inplace(x):
    L = x.shape[0]
    h = 1
    while h < L:
        for i in range(0, L, 2 * h):
            for j in range(i, i + h):
                a = x[j]
                b = x[j + h]
                x[j] = a + b
                x[j + h] = a - b
        h *= 2


@njit(cache=True)
def spectrum_into(bits, W):
    for k in range(bits.shape[0]):
        W[k] = 1 - 2 * np.int32(bits[k])
    fwht_inplace(W)


@njit(parallel=True, cache=True)
def spectra_rows(bits2d):
    B, L = bits2d.shape
    out = np.empty((B, L), np.int32)
    for b in prange(B):
        spectrum_into(bits2d[b], out[b])
    return out


@njit(cache=True)
def max_count(W):
    m = 0
    c = 0
    for a in range(W.shape[0]):
        v = abs(W[a])
        if v > m:
            m = v
            c = 1
        elif v == m:
            c += 1
    return m, c


@njit(cache=True)
def _accepts(v, m2, c2, M, cnt, f2):
    # early-exit test shared by the evaluators: False once the candidate
    # can no longer beat (M, cnt)
    if v > M:
        return False
    if v == M:
        if not f2:
            return False
        if c2 >= cnt:
            return False
    return True


@njit(cache=True)
def eval_flip1(W, par, bits, i, M, cnt, f2):
    s2 = 2 - 4 * np.int64(bits[i])
    m2 = 0
    c2 = 0
    for a in range(W.shape[0]):
        v = W[a] + s2 if par[a & i] else W[a] - s2
        if v < 0:
            v = -v
        if v > m2:
            m2 = v
            c2 = 1
        elif v == m2:
            c2 += 1
        if not _accepts(v, m2, c2, M, cnt, f2):
            return False, m2, c2
    return True, m2, c2


@njit(cache=True)
def eval_flip2(W, par, bits, i, j, M, cnt, f2):
    si = 2 - 4 * np.int64(bits[i])
    sj = 2 - 4 * np.int64(bits[j])
    m2 = 0
    c2 = 0
    for a in range(W.shape[0]):
        v = W[a]
        v = v + si if par[a & i] else v - si
        v = v + sj if par[a & j] else v - sj
        if v < 0:
            v = -v
        if v > m2:
            m2 = v
            c2 = 1
        elif v == m2:
            c2 += 1
        if not _accepts(v, m2, c2, M, cnt, f2):
            return False, m2, c2
    return True, m2, c2


@njit(cache=True)
def eval_rot(bits, r, M, cnt, f2, wbuf, bbuf):
    L = bits.shape[0]
    for k in range(L):
        bbuf[k] = bits[(k + r) % L]
    spectrum_into(bbuf, wbuf)
    m2 = 0
    c2 = 0
    for a in range(L):
        v = abs(wbuf[a])
        if v > m2:
            m2 = v
            c2 = 1
        elif v == m2:
            c2 += 1
        if not _accepts(v, m2, c2, M, cnt, f2):
            return False, m2, c2
    return True, m2, c2


@njit(cache=True)
def apply_flip1(W, par, bits, i):
    s2 = 2 - 4 * np.int64(bits[i])
    for a in range(W.shape[0]):
        if par[a & i]:
            W[a] += s2
        else:
            W[a] -= s2
    bits[i] ^= 1


@njit(cache=True)
def apply_flip2(W, par, bits, i, j):
    apply_flip1(W, par, bits, i)
    apply_flip1(W, par, bits, j)


@njit(cache=True)
def _unpack(word, bits):
    for k in range(bits.shape[0]):
        bits[k] = (word >> np.uint64(k)) & np.uint64(1)


@njit(parallel=True, cache=True)
def words_max_abs(words, n):
    L = 1 << n
    out = np.empty(words.shape[0], np.int32)
    for b in prange(words.shape[0]):
        bits = np.empty(L, np.uint8)
        W = np.empty(L, np.int32)
        _unpack(words[b], bits)
        spectrum_into(bits, W)
        out[b] = max_count(W)[0]
    return out


@njit(cache=True)
def _pattern_one(bits, W, wbuf, bbuf, par, M):
    L = bits.shape[0]
    rot_ok = False
    for r in range(1, L):
        for k in range(L):
            bbuf[k] = bits[(k + r) % L]
        spectrum_into(bbuf, wbuf)
        ok = True
        for a in range(L):
            if abs(wbuf[a]) >= M:
                ok = False
                break
        if ok:
            rot_ok = True
            break
    bit_ok = False
    for i in range(L):
        if eval_flip1(W, par, bits, i, M, 0, False)[0]:
            bit_ok = True
            break
    two_ok = False
    for i in range(L):
        for j in range(i + 1, L):
            if eval_flip2(W, par, bits, i, j, M, 0, False)[0]:
                two_ok = True
                break
        if two_ok:
            break
    return (4 if rot_ok else 0) | (2 if bit_ok else 0) | (1 if two_ok else 0)


@njit(parallel=True, cache=True)
def reach_patterns(words, n, par):
    L = 1 << n
    B = words.shape[0]
    maxabs = np.empty(B, np.int32)
    pattern = np.empty(B, np.uint8)
    for b in prange(B):
        bits = np.empty(L, np.uint8)
        bbuf = np.empty(L, np.uint8)
        W = np.empty(L, np.int32)
        wbuf = np.empty(L, np.int32)
        _unpack(words[b], bits)
        spectrum_into(bits, W)
        M = max_count(W)[0]
        maxabs[b] = M
        pattern[b] = _pattern_one(bits, W, wbuf, bbuf, par, M)
    return maxabs, pattern


ls_drive = build_ls_driver(sys.modules[__name__], njit)
