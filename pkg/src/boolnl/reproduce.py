"""Rerun the operator studies with pinned parameters and diff them against bundled reference tables."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .analysis import (PATTERN_ROWS, SamplePlan, consistency_study, crossover_study,
                       reachability_study, transition_study)
from .operators import CrossoverKind, MutationKind

GOLDEN_FILES = {
    2: "table2_bitset_n3.csv",
    3: "table3_n4.csv",
    4: "table4_rot_n4.csv",
    5: "table5_n4.csv",
    6: "table6_n5.csv",
    7: "table7_singlepoint_n4.csv",
    8: "table8_uniform_n4.csv",
}
TOLERANCE_PP = {6: 3.0, 7: 3.0, 8: 3.0}


def load_golden(table):
    text = resources.files("boolnl.data").joinpath(GOLDEN_FILES[table]).read_text()
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    return rows[0], rows[1:]


@dataclass
class CellDiff:
    row: str
    column: str
    expected: str
    actual: str
    ok: bool
    deviation: float | None = None


@dataclass
class DiffReport:
    table: int
    tolerance: float | None
    cells: list
    computed: list
    details: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(c.ok for c in self.cells)

    def failures(self):
        return [c for c in self.cells if not c.ok]

    def max_deviation(self):
        devs = [c.deviation for c in self.cells if c.deviation is not None]
        return max(devs) if devs else None

    def summary(self):
        kind = "exact" if self.tolerance is None else f"+/-{self.tolerance:g} pp"
        bad = self.failures()
        head = f"table {self.table} ({kind}): {len(self.cells) - len(bad)}/{len(self.cells)} cells match"
        if self.max_deviation() is not None:
            head += f", max deviation {self.max_deviation():.2f} pp"
        return head

    def to_json(self):
        return {"table": self.table, "ok": self.ok, "tolerance_pp": self.tolerance,
                "cells": len(self.cells), "summary": self.summary(),
                "failures": [vars(c) for c in self.failures()], "details": self.details}


def _label(row, width):
    return ",".join(row[:width])


def _exact(table, golden, computed, width=1):
    header, rows = golden
    got = {_label(r, width): dict(zip(computed[0][width:], r[width:])) for r in computed[1:]}
    cells = []
    for r in rows:
        key = _label(r, width)
        for col, exp in zip(header[width:], r[width:]):
            act = got.get(key, {}).get(col, "")
            cells.append(CellDiff(key, col, exp, act, act == exp))
    return DiffReport(table, None, cells, computed)


def _table2(**_):
    return _exact(2, load_golden(2), consistency_study(MutationKind.BIT_SET, 3).csv_rows())


def _table3(**_):
    bit = transition_study(MutationKind.BIT_FLIP, 4).csv_rows("floor-balanced")
    two = transition_study(MutationKind.TWO_BIT_FLIP, 4).csv_rows("floor-balanced")
    return _exact(3, load_golden(3), [bit[0], bit[1], two[1]])


def _table4(**_):
    return _exact(4, load_golden(4), transition_study(MutationKind.ROTATION, 4).csv_rows("floor"))


def _table5(**_):
    census = reachability_study(4)
    rep = _exact(5, load_golden(5), census.csv_rows(percent=False), width=3)
    rep.details["census"] = census.to_json()
    return rep


def _table6(seed=0, fraction=0.01, count=None, **_):
    plan = SamplePlan.sampled(fraction=None if count else fraction, count=count, seed=seed)
    census = reachability_study(5, plan)
    pct = census.percentages()
    header, rows = load_golden(6)
    tol = TOLERANCE_PP[6]
    cells = []
    for r in rows:
        pat = tuple(int(v == "yes") for v in r[:3])
        k = PATTERN_ROWS.index(pat)
        for col, exp in zip(header[3:], r[3:]):
            nl = int(col)
            e = float(exp)
            a = pct[k, nl]
            shown = "no sample" if np.isnan(a) else f"{a:.3f}"
            if pat == (0, 0, 1):
                # structural zero: two bit flip never succeeds alone
                cells.append(CellDiff(_label(r, 3), col, exp, shown, bool(census.counts[k, nl] == 0)))
            elif e == 0:
                # only nonzero reference percentages are compared
                cells.append(CellDiff(_label(r, 3), col, exp, shown, True))
            elif np.isnan(a):
                cells.append(CellDiff(_label(r, 3), col, exp, shown, False))
            else:
                dev = float(abs(a - e))
                cells.append(CellDiff(_label(r, 3), col, exp, shown, dev <= tol, dev))
    computed = census.csv_rows(percent=True)
    rep = DiffReport(6, tol, cells, computed, {"census": census.to_json()})
    return rep


def _crossover(table, kind, seed=0, pairs_per_cell=10_000, **_):
    mat = crossover_study(kind, 4, SamplePlan.sampled(count=1, seed=seed), pairs_per_cell)
    header, rows = load_golden(table)
    tol = TOLERANCE_PP[table]
    p = 100 * mat.probabilities()[..., 0]
    cells = []
    for r in rows:
        i = int(r[0])
        for col, exp in zip(header[1:], r[1:]):
            j = int(col)
            dev = abs(p[i, j] - float(exp))
            cells.append(CellDiff(r[0], col, exp, f"{p[i, j]:.2f}", bool(dev <= tol), float(dev)))
    cols = [int(c) for c in header[1:]]
    computed = [header] + [[str(i)] + [f"{p[i, j]:.2f}" for j in cols] for i in cols]
    return DiffReport(table, tol, cells, computed, {"matrix": mat.to_json()})


def reproduce(table, seed=0, **params) -> DiffReport:
    """Run the study behind ``table`` and diff it against the bundled reference."""
    table = int(table)
    if table == 2:
        return _table2(**params)
    if table == 3:
        return _table3(**params)
    if table == 4:
        return _table4(**params)
    if table == 5:
        return _table5(**params)
    if table == 6:
        return _table6(seed=seed, **params)
    if table == 7:
        return _crossover(7, CrossoverKind.SINGLE_POINT_MID, seed=seed, **params)
    if table == 8:
        return _crossover(8, CrossoverKind.UNIFORM_EVEN_ODD, seed=seed, **params)
    raise ValueError(f"no reference table {table}; choose from {sorted(GOLDEN_FILES)}")
