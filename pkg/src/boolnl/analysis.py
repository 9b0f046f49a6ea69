"""Exhaustive and sampled operator studies over small function spaces.

Functions with ``n <= 6`` are handled as packed ``uint64`` words (bit ``x``
holds ``f(x)``), which makes whole-space sweeps a matter of vectorised bit
operations.  For ``n <= 4`` the nonlinearity of every function is tabulated
once and neighbours are plain lookups.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .core import covering_radius_floor
from .operators import (CrossoverKind, MutationDescriptor, MutationKind,
                        positions)

MAX_ANALYSIS_N = 6
LOOKUP_MAX_N = 4

STUDIED_KINDS = (MutationKind.ROTATION, MutationKind.BIT_FLIP, MutationKind.TWO_BIT_FLIP)
# rows of the reachability census, (rot, bitflip, 2bitflip) success flags
PATTERN_ROWS = [(r, b, t) for r in (1, 0) for b in (1, 0) for t in (1, 0)]
OUTCOMES = ("greater", "lower", "between")


class CollapseViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplePlan:
    """Which functions a study visits.

    ``exhaustive`` walks all ``2^(2^n)`` functions (``n <= 4`` unless
    ``allow_large_exhaustive``).  ``sampled`` draws ``count`` functions, or
    ``fraction`` of the space, uniformly with replacement.
    """

    mode: str = "exhaustive"
    fraction: float | None = None
    count: int | None = None
    seed: int = 0
    allow_large_exhaustive: bool = False
    chunk: int = 1 << 20

    @classmethod
    def exhaustive(cls, **kw):
        return cls(mode="exhaustive", **kw)

    @classmethod
    def sampled(cls, fraction=None, count=None, seed=0, **kw):
        return cls(mode="sampled", fraction=fraction, count=count, seed=seed, **kw)

    def validate(self, n):
        if not 1 <= n <= MAX_ANALYSIS_N:
            raise ValueError(f"studies support 1 <= n <= {MAX_ANALYSIS_N}")
        if self.mode == "exhaustive":
            if n > LOOKUP_MAX_N and not self.allow_large_exhaustive:
                raise ValueError(f"exhaustive study at n={n} needs allow_large_exhaustive")
            if n > 5:
                raise ValueError("exhaustive enumeration beyond n=5 is not supported")
        elif self.mode == "sampled":
            if (self.fraction is None) == (self.count is None):
                raise ValueError("sampled plan needs exactly one of fraction/count")
            if self.fraction is not None and not 0 < self.fraction <= 1:
                raise ValueError("fraction must be in (0, 1]")
            if self.count is not None and self.count < 1:
                raise ValueError("count must be positive")
        else:
            raise ValueError(f"unknown plan mode {self.mode!r}")

    def size(self, n):
        space = 1 << (1 << n)
        if self.mode == "exhaustive":
            return space
        if self.count is not None:
            return int(self.count)
        return max(1, int(round(self.fraction * space)))

    def chunks(self, n):
        """Yield the visited functions as ``uint64`` word arrays."""
        self.validate(n)
        total = self.size(n)
        L = 1 << n
        for k, start in enumerate(range(0, total, self.chunk)):
            stop = min(total, start + self.chunk)
            if self.mode == "exhaustive":
                yield np.arange(start, stop, dtype=np.uint64)
            else:
                rng = np.random.default_rng([self.seed, n, k])
                yield _random_words(rng, stop - start, L)

    def to_json(self):
        return {"mode": self.mode, "fraction": self.fraction, "count": self.count,
                "seed": self.seed, "allow_large_exhaustive": self.allow_large_exhaustive}


def _random_words(rng, size, L):
    if L == 64:
        return rng.integers(0, np.iinfo(np.uint64).max, size=size, dtype=np.uint64, endpoint=True)
    return rng.integers(0, 1 << L, size=size, dtype=np.uint64)


def _word_mask(L):
    return np.uint64((1 << L) - 1)


def rotate_words(words, r, L):
    r = np.uint64(r)
    return ((words >> r) | (words << np.uint64(L - int(r)))) & _word_mask(L)


def mutate_words(words, kind, pos, n):
    """Apply one mutation to every word; returns ``(mutated, effective_mask)``."""
    L = 1 << n
    one = np.uint64(1)
    kind = MutationKind(kind)
    if kind == MutationKind.ROTATION:
        return rotate_words(words, pos, L), np.ones(words.shape, bool)
    if kind.is_pair:
        i, j = (np.uint64(p) for p in pos)
        bi = (words >> i) & one
        bj = (words >> j) & one
        mask = (one << i) | (one << j)
        if kind == MutationKind.TWO_BIT_FLIP:
            eff = np.ones(words.shape, bool)
        elif kind == MutationKind.TWO_BIT_FLIP_IF_EQUAL:
            eff = bi == bj
        elif kind == MutationKind.TWO_BIT_SET:
            eff = (bi == 0) & (bj == 0)
        else:
            eff = (bi == 1) & (bj == 1)
        return words ^ mask, eff
    i = np.uint64(pos)
    b = (words >> i) & one
    if kind == MutationKind.BIT_FLIP:
        eff = np.ones(words.shape, bool)
    elif kind == MutationKind.BIT_SET:
        eff = b == 0
    else:
        eff = b == 1
    return words ^ (one << i), eff


def unpack_words(words, n):
    shifts = np.arange(1 << n, dtype=np.uint64)
    return ((np.asarray(words, np.uint64)[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)


@lru_cache(maxsize=None)
def _maxabs_table(n):
    t = kernels.words_max_abs(np.arange(1 << (1 << n), dtype=np.uint64), n)
    t = t.astype(np.int16)
    t.setflags(write=False)
    return t


@lru_cache(maxsize=2)
def _spectra_table(n):
    t = kernels.spectra_rows(unpack_words(np.arange(1 << (1 << n), dtype=np.uint64), n))
    t.setflags(write=False)
    return t


def nl_of_words(words, n):
    L = 1 << n
    if n <= LOOKUP_MAX_N:
        M = _maxabs_table(n)[words.astype(np.int64)]
    else:
        M = kernels.words_max_abs(words, n)
    return (L // 2 - M.astype(np.int64) // 2).astype(np.int16)


def spectra_of_words(words, n):
    if n <= LOOKUP_MAX_N:
        return _spectra_table(n)[words.astype(np.int64)]
    return kernels.spectra_rows(unpack_words(words, n))


def max_nl_index(n):
    return covering_radius_floor(n)


# ---------------------------------------------------------------- consistency

@dataclass
class PositionConsistency:
    descriptor: MutationDescriptor
    effective: int
    consistent: bool
    delta: list | None


@dataclass
class ConsistencyReport:
    kind: MutationKind
    n: int
    plan: SamplePlan
    positions: list

    @property
    def consistent(self):
        return all(p.consistent for p in self.positions)

    def to_json(self):
        return {
            "study": "consistency", "operator": self.kind.token, "n": self.n,
            "plan": self.plan.to_json(), "consistent": self.consistent,
            "positions": [
                {"position": str(p.descriptor), "effective": p.effective,
                 "consistent": p.consistent, "delta": p.delta}
                for p in self.positions
            ],
        }

    def csv_rows(self):
        L = 1 << self.n
        header = [self.kind.token] + [str(a) for a in range(L)]
        rows = [header]
        for p in self.positions:
            pos = p.descriptor.position
            label = f"{pos[0]}+{pos[1]}" if isinstance(pos, tuple) else str(pos)
            if p.consistent and p.delta is not None:
                rows.append([label] + [str(d) for d in p.delta])
            else:
                rows.append([label] + ["inconsistent"] * L)
        return rows


def consistency_study(kind, n, plan=None):
    """Is the spectrum change of each mutation position the same for every function?"""
    kind = MutationKind(kind)
    plan = plan or SamplePlan.exhaustive()
    plan.validate(n)
    L = 1 << n
    pos_list = list(positions(kind, L))
    first = [None] * len(pos_list)
    ok = [True] * len(pos_list)
    eff_count = [0] * len(pos_list)
    for words in plan.chunks(n):
        S = spectra_of_words(words, n)
        for k, pos in enumerate(pos_list):
            new, eff = mutate_words(words, kind, pos, n)
            if not eff.any():
                continue
            D = spectra_of_words(new[eff], n).astype(np.int64) - S[eff]
            eff_count[k] += int(eff.sum())
            if first[k] is None:
                first[k] = D[0].copy()
            if ok[k] and not np.all(D == first[k]):
                ok[k] = False
    out = []
    for k, pos in enumerate(pos_list):
        consistent = ok[k] and first[k] is not None
        out.append(PositionConsistency(
            MutationDescriptor(kind, pos), eff_count[k], consistent,
            [int(d) for d in first[k]] if consistent else None))
    return ConsistencyReport(kind, n, plan, out)


# ---------------------------------------------------------------- transitions

@dataclass
class TransitionTable:
    """Counts of (increase, same, decrease) per position key and starting nl."""

    kind: MutationKind
    n: int
    per_position: bool
    keys: list
    counts: np.ndarray          # (len(keys), max_nl + 1, 3)
    plan: SamplePlan = field(default_factory=SamplePlan)

    def totals(self):
        return self.counts.sum(axis=2)

    def probabilities(self):
        tot = self.totals()[..., None]
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(tot > 0, self.counts / np.maximum(tot, 1), np.nan)

    def cell(self, key, nl):
        return tuple(int(c) for c in self.counts[self.keys.index(key), nl])

    def percent(self, key, nl, convention="floor"):
        """Integer-percent view of one cell; see :func:`percent_triple`."""
        c = self.counts[self.keys.index(key), nl]
        if not c.sum():
            return None
        return percent_triple(c, convention)

    def present_nl(self):
        return [int(v) for v in np.flatnonzero(self.totals().sum(axis=0))]

    def to_json(self):
        return {
            "study": "transitions", "operator": self.kind.token, "n": self.n,
            "per_position": self.per_position, "plan": self.plan.to_json(),
            "rows": [
                {"position": key, "nl": nl, "increase": int(c[0]), "same": int(c[1]),
                 "decrease": int(c[2]),
                 "probabilities": [float(x) for x in c / c.sum()]}
                for ki, key in enumerate(self.keys)
                for nl in range(self.counts.shape[1])
                for c in [self.counts[ki, nl]] if c.sum()
            ],
        }

    def csv_rows(self, convention="floor"):
        nls = self.present_nl()
        if self.per_position:
            rows = [["position"] + [str(v) for v in nls]]
        else:
            rows = [["operator"] + [str(v) for v in nls]]
        for key in self.keys:
            label = self.kind.token if key == "all" else str(key)
            rows.append([label] + ["/".join(str(p) for p in self.percent(key, v, convention)) for v in nls])
        return rows


PERCENT_CONVENTIONS = ("round", "floor", "floor-balanced")


def percent_triple(counts, convention="floor"):
    """Integer percentages of a count vector, computed in exact arithmetic.

    ``round`` rounds half up; ``floor`` truncates; ``floor-balanced``
    truncates and then adds the shortfall from 100 to the smallest nonzero
    truncated entry, so each triple sums to 100.
    """
    counts = [int(c) for c in counts]
    tot = sum(counts)
    if convention == "round":
        return tuple((200 * c + tot) // (2 * tot) for c in counts)
    fl = [100 * c // tot for c in counts]
    if convention == "floor":
        return tuple(fl)
    if convention != "floor-balanced":
        raise ValueError(f"unknown percent convention {convention!r}")
    short = 100 - sum(fl)
    if short:
        nz = [k for k, v in enumerate(fl) if v]
        k = min(nz, key=lambda k: fl[k]) if nz else max(range(len(fl)), key=lambda k: counts[k])
        fl[k] += short
    return tuple(fl)


def transition_study(kind, n, plan=None, collapse=None, collapse_tol=0.01):
    kind = MutationKind(kind)
    plan = plan or SamplePlan.exhaustive()
    plan.validate(n)
    if collapse is None:
        collapse = kind in (MutationKind.BIT_FLIP, MutationKind.TWO_BIT_FLIP)
    L = 1 << n
    nlmax = max_nl_index(n)
    pos_list = list(positions(kind, L))
    counts = np.zeros((len(pos_list), nlmax + 1, 3), np.int64)
    for words in plan.chunks(n):
        base = nl_of_words(words, n).astype(np.int64)
        for k, pos in enumerate(pos_list):
            new, eff = mutate_words(words, kind, pos, n)
            b = base[eff]
            after = nl_of_words(new[eff], n).astype(np.int64)
            cls = np.where(after > b, 0, np.where(after == b, 1, 2))
            counts[k] += np.bincount(b * 3 + cls, minlength=(nlmax + 1) * 3).reshape(nlmax + 1, 3)
    keys = [p if isinstance(p, int) else f"{p[0]},{p[1]}" for p in pos_list]
    if not collapse:
        return TransitionTable(kind, n, True, keys, counts, plan)
    _check_collapse(kind, counts, keys, plan, collapse_tol)
    return TransitionTable(kind, n, False, ["all"], counts.sum(axis=0, keepdims=True), plan)


def _check_collapse(kind, counts, keys, plan, tol):
    if plan.mode == "exhaustive":
        bad = [keys[k] for k in range(len(keys)) if not np.array_equal(counts[k], counts[0])]
        if bad:
            raise CollapseViolation(
                f"{kind.token}: counts at positions {bad[:5]} differ from position {keys[0]}")
        return
    tot = counts.sum(axis=2, keepdims=True)
    pooled = counts.sum(axis=0) / np.maximum(counts.sum(axis=(0, 2))[:, None], 1)
    probs = counts / np.maximum(tot, 1)
    # allow the configured slack plus four binomial standard errors per cell
    sigma = np.sqrt(pooled[None] * (1 - pooled[None]) / np.maximum(tot, 1))
    excess = (np.abs(probs - pooled[None]) - (tol + 4 * sigma))[np.broadcast_to(tot > 0, probs.shape)]
    if excess.size and excess.max() > 0:
        raise CollapseViolation(
            f"{kind.token}: per-position probabilities deviate beyond sampling noise "
            f"(excess {excess.max():.3f})")


# ---------------------------------------------------------------- reachability

@dataclass
class ReachabilityCensus:
    n: int
    counts: np.ndarray          # (8, max_nl + 1), rows in PATTERN_ROWS order
    plan: SamplePlan = field(default_factory=SamplePlan)

    def totals(self):
        return self.counts.sum(axis=0)

    def count(self, pattern, nl):
        return int(self.counts[PATTERN_ROWS.index(tuple(int(p) for p in pattern)), nl])

    def percentages(self):
        tot = self.totals()
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(tot > 0, 100.0 * self.counts / np.maximum(tot, 1), np.nan)

    def columns(self):
        """Starting nl values shown in the table: present ones minus a trailing all-dead column."""
        nls = [int(v) for v in np.flatnonzero(self.totals())]
        if nls:
            last = nls[-1]
            if self.counts[PATTERN_ROWS.index((0, 0, 0)), last] == self.totals()[last]:
                nls = nls[:-1]
        return nls

    def to_json(self):
        return {
            "study": "reachability", "n": self.n, "plan": self.plan.to_json(),
            "patterns": [list(p) for p in PATTERN_ROWS],
            "counts": {str(nl): [int(c) for c in self.counts[:, nl]]
                       for nl in np.flatnonzero(self.totals())},
            "totals": {str(nl): int(self.totals()[nl]) for nl in np.flatnonzero(self.totals())},
        }

    def csv_rows(self, percent=None):
        if percent is None:
            percent = self.plan.mode != "exhaustive"
        cols = self.columns()
        rows = [["rot", "bitflip", "2bitflip"] + [str(v) for v in cols]]
        pct = self.percentages()
        for r, pat in enumerate(PATTERN_ROWS):
            flags = ["yes" if p else "no" for p in pat]
            if percent:
                vals = [_fmt_pct(pct[r, v]) for v in cols]
            else:
                vals = [str(int(self.counts[r, v])) for v in cols]
            rows.append(flags + vals)
        if not percent:
            rows.append(["total", "", ""] + [str(int(self.totals()[v])) for v in cols])
        return rows


def _fmt_pct(x):
    return f"{x:.3f}".rstrip("0").rstrip(".")


def reachability_study(n, plan=None):
    """Tally which of rot / bit flip / two-bit flip can raise each function's nl."""
    plan = plan or SamplePlan.exhaustive()
    plan.validate(n)
    nlmax = max_nl_index(n)
    L = 1 << n
    counts = np.zeros((8, nlmax + 1), np.int64)
    for words in plan.chunks(n):
        M, pat = kernels.reach_patterns(words, n)
        nl = L // 2 - M.astype(np.int64) // 2
        row = 7 - pat.astype(np.int64)
        counts += np.bincount(row * (nlmax + 1) + nl, minlength=8 * (nlmax + 1)).reshape(8, nlmax + 1)
    return ReachabilityCensus(n, counts, plan)


# ---------------------------------------------------------------- crossover

@dataclass
class CrossoverMatrix:
    n: int
    kind: CrossoverKind
    counts: np.ndarray          # (max_nl + 1, max_nl + 1, 3): greater, lower, between
    plan: SamplePlan = field(default_factory=SamplePlan)
    pairs_per_cell: int = 0

    def probabilities(self):
        tot = self.counts.sum(axis=2, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(tot > 0, self.counts / np.maximum(tot, 1), np.nan)

    def success_percent(self, nl1, nl2):
        return 100.0 * self.probabilities()[nl1, nl2, 0]

    def rows(self):
        tot = self.counts.sum(axis=2)
        return [int(v) for v in np.flatnonzero(tot.sum(axis=1))]

    def to_json(self):
        tot = self.counts.sum(axis=2)
        cells = []
        for i in range(tot.shape[0]):
            for j in range(tot.shape[1]):
                if tot[i, j]:
                    c = self.counts[i, j]
                    cells.append({"nl1": i, "nl2": j, "pairs": int(tot[i, j]),
                                  **{o: int(c[k]) for k, o in enumerate(OUTCOMES)},
                                  "probabilities": [float(x) for x in c / tot[i, j]]})
        return {"study": "crossover", "kind": self.kind.value, "n": self.n,
                "plan": self.plan.to_json(), "pairs_per_cell": self.pairs_per_cell,
                "cells": cells}

    def csv_rows(self, cols=None):
        rows_nl = self.rows()
        cols = cols if cols is not None else rows_nl
        out = [["nl"] + [str(v) for v in cols]]
        p = self.probabilities()
        for i in rows_nl:
            out.append([str(i)] + ["" if np.isnan(p[i, j, 0]) else str(round(100 * p[i, j, 0]))
                                   for j in cols])
        return out


def crossover_words(w1, w2, kind, n, rng=None):
    L = 1 << n
    full = _word_mask(L)
    if kind == CrossoverKind.SINGLE_POINT_MID:
        lo = np.uint64((1 << (L // 2)) - 1)
        return (w1 & lo) | (w2 & (full ^ lo))
    if kind == CrossoverKind.UNIFORM_EVEN_ODD:
        even = np.uint64(int("01" * (L // 2), 2) if L > 1 else 1)
        return (w1 & even) | (w2 & (full ^ even))
    if kind == CrossoverKind.SINGLE_POINT_RANDOM:
        cut = rng.integers(1, L, size=w1.shape[0]).astype(np.uint64)
        lo = (np.uint64(1) << cut) - np.uint64(1)
        return (w1 & lo) | (w2 & (full ^ lo))
    if kind == CrossoverKind.UNIFORM_RANDOM:
        m = _random_words(rng, w1.shape[0], L)
        return (w1 & m) | (w2 & (full ^ m))
    raise ValueError(kind)


def _classify(c, a, b):
    hi = np.maximum(a, b)
    lo = np.minimum(a, b)
    return np.where(c > hi, 0, np.where(c < lo, 1, 2))


def crossover_study(kind, n, plan=None, pairs_per_cell=10_000):
    """Child-versus-parents nonlinearity outcomes, per (nl1, nl2) cell.

    At ``n <= 4`` sampling is stratified: each cell gets ``pairs_per_cell``
    parent pairs drawn uniformly from the two nonlinearity classes, or every
    pair when the cell holds fewer.  Above that, parent pairs are drawn
    uniformly from the plan.
    """
    kind = CrossoverKind(kind)
    plan = plan or SamplePlan.sampled(count=1, seed=0)
    nlmax = max_nl_index(n)
    counts = np.zeros((nlmax + 1, nlmax + 1, 3), np.int64)
    kind_idx = list(CrossoverKind).index(kind)
    if n <= LOOKUP_MAX_N:
        allw = np.arange(1 << (1 << n), dtype=np.uint64)
        nl_all = nl_of_words(allw, n)
        classes = {int(v): allw[nl_all == v] for v in np.unique(nl_all)}
        for i, ci in classes.items():
            for j, cj in classes.items():
                rng = np.random.default_rng([plan.seed, n, i, j, kind_idx])
                if ci.size * cj.size <= pairs_per_cell:
                    w1 = np.repeat(ci, cj.size)
                    w2 = np.tile(cj, ci.size)
                else:
                    w1 = ci[rng.integers(0, ci.size, pairs_per_cell)]
                    w2 = cj[rng.integers(0, cj.size, pairs_per_cell)]
                child = crossover_words(w1, w2, kind, n, rng)
                out = _classify(nl_of_words(child, n), i, j)
                counts[i, j] += np.bincount(out, minlength=3)
        return CrossoverMatrix(n, kind, counts, plan, pairs_per_cell)
    plan.validate(n)
    for k, words in enumerate(plan.chunks(n)):
        rng = np.random.default_rng([plan.seed, n, k, kind_idx, 1])
        w1, w2 = words[0::2], words[1::2]
        m = min(w1.size, w2.size)
        w1, w2 = w1[:m], w2[:m]
        a = nl_of_words(w1, n)
        b = nl_of_words(w2, n)
        c = nl_of_words(crossover_words(w1, w2, kind, n, rng), n)
        out = _classify(c, a, b)
        np.add.at(counts, (a.astype(np.int64), b.astype(np.int64), out), 1)
    return CrossoverMatrix(n, kind, counts, plan, 0)


# ---------------------------------------------------------------- census

def nl_census(n, plan=None):
    plan = plan or SamplePlan.exhaustive()
    plan.validate(n)
    counts = np.zeros(max_nl_index(n) + 1, np.int64)
    for words in plan.chunks(n):
        counts += np.bincount(nl_of_words(words, n).astype(np.int64), minlength=counts.size)
    return {int(v): int(counts[v]) for v in np.flatnonzero(counts)}
