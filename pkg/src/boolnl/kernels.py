"""Backend-dispatched hot kernels plus small cached lookup tables."""

from functools import lru_cache

import numpy as np

from ._backend import BACKEND

if BACKEND == "numba":
    from . import kernels_nb as impl
else:
    from . import kernels_np as impl

fwht_inplace = impl.fwht_inplace
spectrum_into = impl.spectrum_into
spectra_rows = impl.spectra_rows
max_count = impl.max_count
words_max_abs = impl.words_max_abs
ls_drive = impl.ls_drive


@lru_cache(maxsize=None)
def parity_table(L):
    """``par[a]`` = parity of popcount(a), for ``a < L``."""
    par = np.zeros(L, dtype=np.uint8)
    for b in range(L.bit_length() - 1):
        par ^= ((np.arange(L) >> b) & 1).astype(np.uint8)
    par.setflags(write=False)
    return par


@lru_cache(maxsize=4)
def pair_tables(L):
    """Lexicographic list of all pairs ``i < j < L`` as two int64 arrays."""
    i, j = np.triu_indices(L, k=1)
    i = i.astype(np.int64)
    j = j.astype(np.int64)
    i.setflags(write=False)
    j.setflags(write=False)
    return i, j


def reach_patterns(words, n):
    return impl.reach_patterns(np.asarray(words, dtype=np.uint64), n, parity_table(1 << n))
