"""Truth tables, Walsh-Hadamard spectra, nonlinearity and the two fitness functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels

MIN_N = 1
MAX_N = 16


class NotABooleanSpectrum(ValueError):
    """Raised when a spectrum has no Boolean preimage."""


def _check_n(n):
    if not (MIN_N <= int(n) <= MAX_N):
        raise ValueError(f"n must be in [{MIN_N}, {MAX_N}], got {n}")
    return int(n)


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


class TruthTable:
    """Value vector of an ``n``-variable Boolean function.

    ``bits[x]`` is ``f(x)`` where the input vector is read as the integer
    ``x``; bit 0 of ``x`` is its least significant coordinate.  Instances are
    immutable.
    """

    __slots__ = ("n", "bits")

    def __init__(self, n, bits):
        n = _check_n(n)
        bits = _frozen(bits, np.uint8)
        if bits.ndim != 1 or bits.shape[0] != 1 << n:
            raise ValueError(f"truth table of n={n} needs {1 << n} entries, got {bits.shape}")
        if bits.size and bits.max() > 1:
            raise ValueError("truth table entries must be 0 or 1")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "bits", bits)

    def __setattr__(self, name, value):
        raise AttributeError("TruthTable is immutable")

    def __reduce__(self):
        return TruthTable, (self.n, np.array(self.bits))

    @property
    def length(self):
        return self.bits.shape[0]

    @classmethod
    def zeros(cls, n):
        return cls(n, np.zeros(1 << n, np.uint8))

    @classmethod
    def ones(cls, n):
        return cls(n, np.ones(1 << n, np.uint8))

    @classmethod
    def from_function(cls, n, fn):
        """Tabulate ``fn(x)`` for every input integer ``x``."""
        return cls(n, [int(fn(x)) & 1 for x in range(1 << n)])

    @classmethod
    def from_int(cls, value, n):
        n = _check_n(n)
        L = 1 << n
        value = int(value)
        if value < 0 or value >> L:
            raise ValueError(f"value does not fit a table of length {L}")
        raw = np.frombuffer(value.to_bytes((L + 7) // 8, "little"), dtype=np.uint8)
        return cls(n, np.unpackbits(raw, bitorder="little")[:L])

    def to_int(self):
        packed = np.packbits(self.bits, bitorder="little")
        return int.from_bytes(packed.tobytes(), "little")

    @classmethod
    def from_hex(cls, text, n):
        return cls.from_int(int(text, 16), n)

    def to_hex(self):
        width = max(1, (self.length + 3) // 4)
        return format(self.to_int(), f"0{width}x")

    def weight(self):
        return int(self.bits.sum())

    def __eq__(self, other):
        if not isinstance(other, TruthTable):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.n, self.bits.tobytes()))

    def __repr__(self):
        return f"TruthTable(n={self.n}, hex={self.to_hex()!r})"


class WalshSpectrum:
    """Walsh-Hadamard coefficients ``W_f(a)`` indexed by the integer ``a``."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n, coeffs):
        n = _check_n(n)
        coeffs = _frozen(coeffs, np.int64)
        if coeffs.ndim != 1 or coeffs.shape[0] != 1 << n:
            raise ValueError(f"spectrum of n={n} needs {1 << n} coefficients, got {coeffs.shape}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("WalshSpectrum is immutable")

    def __reduce__(self):
        return WalshSpectrum, (self.n, np.array(self.coeffs))

    def max_abs(self):
        return int(np.abs(self.coeffs).max())

    def parseval_holds(self):
        return int(np.dot(self.coeffs, self.coeffs)) == 1 << (2 * self.n)

    def to_json(self):
        return [int(c) for c in self.coeffs]

    def __eq__(self, other):
        if not isinstance(other, WalshSpectrum):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.n, self.coeffs.tobytes()))

    def __repr__(self):
        return f"WalshSpectrum(n={self.n}, coeffs={self.to_json()})"


@dataclass(frozen=True)
class DeltaVector:
    n: int
    deltas: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "deltas", _frozen(self.deltas, np.int64))
        if self.deltas.shape != (1 << self.n,):
            raise ValueError("delta length must be 2**n")

    def __neg__(self):
        return DeltaVector(self.n, -self.deltas)

    def __add__(self, other):
        if self.n != other.n:
            raise ValueError("delta dimension mismatch")
        return DeltaVector(self.n, self.deltas + other.deltas)

    def __eq__(self, other):
        if not isinstance(other, DeltaVector):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.deltas, other.deltas)

    def __hash__(self):
        return hash((self.n, self.deltas.tobytes()))


@dataclass(frozen=True, order=False)
class FitnessValue:
    """``nl + refinement`` kept exact; refinement is 0 under fitness 1."""

    nl: int
    refinement: Fraction = Fraction(0)

    def __post_init__(self):
        if not (0 <= self.refinement < 1):
            raise ValueError("refinement must lie in [0, 1)")

    @property
    def value(self):
        return self.nl + self.refinement

    def __float__(self):
        return float(self.value)

    def __lt__(self, other):
        return self.value < _fv(other)

    def __le__(self, other):
        return self.value <= _fv(other)

    def __gt__(self, other):
        return self.value > _fv(other)

    def __ge__(self, other):
        return self.value >= _fv(other)

    def __eq__(self, other):
        if isinstance(other, (FitnessValue, int, Fraction)):
            return self.value == _fv(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.value)


def _fv(x):
    return x.value if isinstance(x, FitnessValue) else x


def walsh_transform(tt: TruthTable) -> WalshSpectrum:
    """In-place butterfly, O(n 2^n)."""
    W = np.empty(tt.length, np.int32)
    kernels.spectrum_into(tt.bits, W)
    return WalshSpectrum(tt.n, W)


def walsh_transform_naive(tt: TruthTable) -> WalshSpectrum:
    """Direct O(4^n) evaluation of the defining sum; a test oracle."""
    L = tt.length
    x = np.arange(L, dtype=np.uint32)
    dots = np.bitwise_count(x[:, None] & x[None, :]) & 1      # a.x for every (a, x)
    terms = (tt.bits[None, :].astype(np.int64) ^ dots) * -2 + 1
    return WalshSpectrum(tt.n, terms.sum(axis=1))


def inverse_walsh(spec: WalshSpectrum) -> TruthTable:
    v = np.array(spec.coeffs, dtype=np.int64)
    kernels.fwht_inplace(v)
    L = v.shape[0]
    if np.any(v % L):
        raise NotABooleanSpectrum("reconstruction is not integral")
    v //= L
    if not np.all((v == 1) | (v == -1)):
        raise NotABooleanSpectrum("reconstructed values are not all +1/-1")
    return TruthTable(spec.n, (v == -1).astype(np.uint8))


def nonlinearity(spec: WalshSpectrum) -> int:
    return (1 << (spec.n - 1)) - spec.max_abs() // 2


def covering_radius_bound(n: int):
    """``2^(n-1) - 2^(n/2-1)`` as an exact sympy number (a surd for odd n)."""
    import sympy

    if n < 1:
        raise ValueError("n must be positive")
    two = sympy.Integer(2)
    return two ** (n - 1) - two ** (sympy.Rational(n, 2) - 1)


def covering_radius_floor(n: int) -> int:
    """Integer part of :func:`covering_radius_bound`, computed exactly."""
    if n < 1:
        raise ValueError("n must be positive")
    if n % 2 == 0:
        return (1 << (n - 1)) - (1 << (n // 2 - 1)) if n >= 2 else 0
    # 2^(n/2-1) = sqrt(2^(n-2)), irrational for odd n
    if n == 1:
        return 0
    return (1 << (n - 1)) - (math.isqrt(1 << (n - 2)) + 1)


def fitness_from_spectrum(spec: WalshSpectrum, variant: int = 1) -> FitnessValue:
    A = np.abs(spec.coeffs)
    m = int(A.max())
    nl = (1 << (spec.n - 1)) - m // 2
    if variant == 1:
        return FitnessValue(nl)
    if variant == 2:
        L = A.shape[0]
        return FitnessValue(nl, Fraction(L - int(np.count_nonzero(A == m)), L))
    raise ValueError(f"unknown fitness variant {variant}")


def fitness_from_max_count(n, max_abs, count, variant):
    """Same as :func:`fitness_from_spectrum` from ``max|W|`` and its multiplicity."""
    nl = (1 << (n - 1)) - int(max_abs) // 2
    if variant == 1:
        return FitnessValue(nl)
    L = 1 << n
    return FitnessValue(nl, Fraction(L - int(count), L))


def fitness1(tt: TruthTable) -> FitnessValue:
    return fitness_from_spectrum(walsh_transform(tt), 1)


def fitness2(tt: TruthTable) -> FitnessValue:
    return fitness_from_spectrum(walsh_transform(tt), 2)


def apply_spectrum_delta(spec: WalshSpectrum, delta: DeltaVector) -> WalshSpectrum:
    if delta.n != spec.n:
        raise ValueError("delta length must match the spectrum")
    return WalshSpectrum(spec.n, spec.coeffs + delta.deltas)
