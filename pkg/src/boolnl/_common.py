"""Scalar helpers shared verbatim by both kernel backends.

Written so they compile inside numba kernels and also run as plain Python
with identical results (int64-safe arithmetic only).
"""

try:
    from numba.extending import register_jitable as jitable
except ImportError:  # pragma: no cover
    def jitable(fn):
        return fn

M32 = 0xFFFFFFFF


@jitable
def hash32(x):
    x = (x ^ (x >> 16)) & M32
    x = (x * 0x45D9F3B) & M32
    x = (x ^ (x >> 16)) & M32
    x = (x * 0x45D9F3B) & M32
    return (x ^ (x >> 16)) & M32


@jitable
def half_bits(size):
    """Smallest h >= 1 with 4**h >= size."""
    h = 1
    while (1 << (2 * h)) < size:
        h += 1
    return h


@jitable
def permute_index(k, size, key, half):
    """Keyed bijection of ``range(size)``: 4-round Feistel plus cycle walking."""
    mask = (1 << half) - 1
    x = k
    while True:
        left = x >> half
        right = x & mask
        for rnd in range(4):
            f = hash32((right ^ (key + rnd * 0x9E3779B)) & M32) & mask
            left, right = right, left ^ f
        x = (left << half) | right
        if x < size:
            return x


@jitable
def solution_key(run_key, serial):
    return hash32((run_key ^ hash32((serial * 0x27D4EB2F + 0x165667B1) & M32)) & M32)

