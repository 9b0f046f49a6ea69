"""Mutation and crossover operators on truth tables.

Rotation moves the bit at index ``k`` to ``(k - r) mod L``.  Two-bit
operators take unordered pairs encoded as ``i < j``.  Randomness always
comes from an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import DeltaVector, TruthTable
from .kernels import pair_tables, parity_table


class PositionOutOfRange(IndexError):
    pass


class DimensionMismatch(ValueError):
    pass


class _Marker:
    def __init__(self, name):
        self._name = name

    def __repr__(self):
        return self._name

    def __bool__(self):
        return False


NOOP = _Marker("NOOP")
NOT_CLOSED_FORM = _Marker("NOT_CLOSED_FORM")


class MutationKind(enum.IntEnum):
    # values are the operator codes used by the search kernels
    BIT_SET = 0
    BIT_RESET = 1
    BIT_FLIP = 2
    TWO_BIT_FLIP = 3
    TWO_BIT_FLIP_IF_EQUAL = 4
    TWO_BIT_SET = 5
    TWO_BIT_RESET = 6
    ROTATION = 7

    @property
    def token(self):
        return _TOKENS[self]

    @property
    def is_pair(self):
        return MutationKind.TWO_BIT_FLIP <= self <= MutationKind.TWO_BIT_RESET

    @property
    def is_single(self):
        return self <= MutationKind.BIT_FLIP

    @classmethod
    def parse(cls, text):
        key = text.strip().lower().replace("_", "").replace("-", "")
        try:
            return _ALIASES[key]
        except KeyError:
            raise ValueError(f"unknown mutation operator {text!r}") from None


_TOKENS = {
    MutationKind.BIT_SET: "bitset",
    MutationKind.BIT_RESET: "bitreset",
    MutationKind.BIT_FLIP: "bitflip",
    MutationKind.TWO_BIT_FLIP: "2bitflip",
    MutationKind.TWO_BIT_FLIP_IF_EQUAL: "2bitflipeq",
    MutationKind.TWO_BIT_SET: "2bitset",
    MutationKind.TWO_BIT_RESET: "2bitreset",
    MutationKind.ROTATION: "rot",
}
_ALIASES = {v: k for k, v in _TOKENS.items()}
_ALIASES.update({
    "bit": MutationKind.BIT_FLIP,
    "flip": MutationKind.BIT_FLIP,
    "2bit": MutationKind.TWO_BIT_FLIP,
    "twobitflip": MutationKind.TWO_BIT_FLIP,
    "2bitflipifequal": MutationKind.TWO_BIT_FLIP_IF_EQUAL,
    "rotation": MutationKind.ROTATION,
})

# short labels used in operator-combination strings such as "2bit/rot/bit"
COMBO_LABELS = {
    MutationKind.BIT_FLIP: "bit",
    MutationKind.TWO_BIT_FLIP: "2bit",
    MutationKind.ROTATION: "rot",
}


def parse_ops(text):
    """``"2bit/rot/bit"`` -> ``[TWO_BIT_FLIP, ROTATION, BIT_FLIP]``."""
    ops = [MutationKind.parse(tok) for tok in text.split("/") if tok.strip()]
    if not ops:
        raise ValueError("empty operator list")
    return ops


def format_ops(ops):
    return "/".join(COMBO_LABELS.get(op, op.token) for op in ops)


@dataclass(frozen=True)
class MutationDescriptor:
    kind: MutationKind
    position: int | tuple

    def __post_init__(self):
        kind = MutationKind(self.kind)
        object.__setattr__(self, "kind", kind)
        pos = self.position
        if kind.is_pair:
            if not (isinstance(pos, tuple) and len(pos) == 2):
                raise ValueError(f"{kind.name} needs a position pair")
            i, j = (int(p) for p in pos)
            if not i < j:
                raise ValueError("pair positions must satisfy i < j")
            object.__setattr__(self, "position", (i, j))
        else:
            if isinstance(pos, tuple):
                raise ValueError(f"{kind.name} needs a single position")
            object.__setattr__(self, "position", int(pos))

    def __str__(self):
        if self.kind.is_pair:
            return f"{self.kind.token}:{self.position[0]},{self.position[1]}"
        return f"{self.kind.token}:{self.position}"

    @classmethod
    def parse(cls, text):
        """Parse ``"bitflip:5"``, ``"2bitflip:3,9"``, ``"rot:4"`` and friends."""
        name, _, payload = text.partition(":")
        if not payload:
            raise ValueError(f"missing position in {text!r}")
        kind = MutationKind.parse(name)
        parts = [int(p) for p in payload.split(",")]
        if kind.is_pair:
            if len(parts) != 2:
                raise ValueError(f"{text!r}: expected two positions")
            return cls(kind, tuple(sorted(parts)))
        if len(parts) != 1:
            raise ValueError(f"{text!r}: expected one position")
        return cls(kind, parts[0])

    def check_range(self, L):
        if self.kind == MutationKind.ROTATION:
            if not 1 <= self.position < L:
                raise PositionOutOfRange(f"rotation amount {self.position} outside [1, {L})")
        elif self.kind.is_pair:
            if self.position[1] >= L or self.position[0] < 0:
                raise PositionOutOfRange(f"positions {self.position} outside [0, {L})")
        elif not 0 <= self.position < L:
            raise PositionOutOfRange(f"position {self.position} outside [0, {L})")


def _mutate_bits(bits, kind, pos):
    """Mutated copy of ``bits`` or ``None`` when the mutation is a no-op."""
    if kind == MutationKind.ROTATION:
        return np.roll(bits, -pos)
    if kind.is_pair:
        i, j = pos
        bi, bj = bits[i], bits[j]
        if kind == MutationKind.TWO_BIT_FLIP_IF_EQUAL and bi != bj:
            return None
        if kind == MutationKind.TWO_BIT_SET and (bi or bj):
            return None
        if kind == MutationKind.TWO_BIT_RESET and not (bi and bj):
            return None
        out = bits.copy()
        out[i] ^= 1
        out[j] ^= 1
        return out
    b = bits[pos]
    if (kind == MutationKind.BIT_SET and b) or (kind == MutationKind.BIT_RESET and not b):
        return None
    out = bits.copy()
    out[pos] ^= 1
    return out


def apply_mutation(tt: TruthTable, m: MutationDescriptor):
    """Mutated table, or :data:`NOOP` when ``m`` would not change ``tt``."""
    m.check_range(tt.length)
    out = _mutate_bits(tt.bits, m.kind, m.position)
    return NOOP if out is None else TruthTable(tt.n, out)


def positions(kind, L):
    """Canonical position order: indices, lexicographic pairs, amounts 1..L-1."""
    kind = MutationKind(kind)
    if kind == MutationKind.ROTATION:
        return range(1, L)
    if kind.is_pair:
        pi, pj = pair_tables(L)
        return zip(pi.tolist(), pj.tolist())
    return range(L)


def neighborhood_size(kind, n):
    """Nominal (upper-bound) neighbourhood size for tables of ``n`` variables."""
    L = 1 << n
    kind = MutationKind(kind)
    if kind == MutationKind.ROTATION:
        return L - 1
    if kind.is_pair:
        return L * (L - 1) // 2
    return L


def neighborhood(tt: TruthTable, kind: MutationKind):
    """Lazily yield ``(descriptor, table)`` for every effective mutation."""
    kind = MutationKind(kind)
    for pos in positions(kind, tt.length):
        out = _mutate_bits(tt.bits, kind, pos)
        if out is not None:
            yield MutationDescriptor(kind, pos), TruthTable(tt.n, out)


def _set_pattern(n, i):
    # spectrum change caused by switching f(i) from 0 to 1
    L = 1 << n
    par = parity_table(L)
    return -2 * (1 - 2 * par[np.arange(L) & i].astype(np.int64))


def mutation_delta(m: MutationDescriptor, n: int):
    """Function-independent spectrum change, or :data:`NOT_CLOSED_FORM`."""
    L = 1 << n
    m.check_range(L)
    if m.kind == MutationKind.BIT_SET:
        return DeltaVector(n, _set_pattern(n, m.position))
    if m.kind == MutationKind.BIT_RESET:
        return DeltaVector(n, -_set_pattern(n, m.position))
    if m.kind in (MutationKind.TWO_BIT_SET, MutationKind.TWO_BIT_RESET):
        i, j = m.position
        d = _set_pattern(n, i) + _set_pattern(n, j)
        return DeltaVector(n, d if m.kind == MutationKind.TWO_BIT_SET else -d)
    return NOT_CLOSED_FORM


class CrossoverKind(enum.Enum):
    SINGLE_POINT_MID = "singlepoint-mid"
    UNIFORM_EVEN_ODD = "uniform-evenodd"
    SINGLE_POINT_RANDOM = "singlepoint"
    UNIFORM_RANDOM = "uniform"

    @property
    def deterministic(self):
        return self in (CrossoverKind.SINGLE_POINT_MID, CrossoverKind.UNIFORM_EVEN_ODD)

    @classmethod
    def parse(cls, text):
        key = text.strip().lower().replace("_", "-")
        aliases = {
            "single-point-mid": "singlepoint-mid", "mid": "singlepoint-mid",
            "uniform-even-odd": "uniform-evenodd", "evenodd": "uniform-evenodd",
            "single-point": "singlepoint", "onepoint": "singlepoint",
        }
        key = aliases.get(key, key)
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown crossover {text!r}")


def crossover_bits(b1, b2, kind, rng=None):
    L = b1.shape[0]
    if kind == CrossoverKind.SINGLE_POINT_MID:
        return np.concatenate([b1[:L // 2], b2[L // 2:]])
    if kind == CrossoverKind.UNIFORM_EVEN_ODD:
        out = b2.copy()
        out[0::2] = b1[0::2]
        return out
    if kind == CrossoverKind.SINGLE_POINT_RANDOM:
        cut = int(rng.integers(1, L))
        return np.concatenate([b1[:cut], b2[cut:]])
    if kind == CrossoverKind.UNIFORM_RANDOM:
        return np.where(rng.integers(0, 2, L, dtype=np.uint8).astype(bool), b1, b2)
    raise ValueError(f"unknown crossover {kind}")


def crossover(p1: TruthTable, p2: TruthTable, kind: CrossoverKind, rng=None) -> TruthTable:
    if p1.n != p2.n:
        raise DimensionMismatch(f"parents have n={p1.n} and n={p2.n}")
    kind = CrossoverKind(kind)
    if not kind.deterministic and rng is None:
        raise ValueError(f"{kind.name} needs a random generator")
    return TruthTable(p1.n, crossover_bits(p1.bits, p2.bits, kind, rng))


def mix_bits(bits, rng):
    """Shuffle the inclusive segment between two distinct random positions."""
    out = bits.copy()
    a, b = sorted(rng.choice(bits.shape[0], size=2, replace=False).tolist())
    rng.shuffle(out[a:b + 1])
    return out


def mixing_mutation(tt: TruthTable, rng) -> TruthTable:
    return TruthTable(tt.n, mix_bits(tt.bits, rng))
