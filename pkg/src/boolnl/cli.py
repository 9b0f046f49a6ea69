"""Command-line front end: ``boolnl {analyze,search,reproduce,census}``.

Exit status: 0 success, 1 usage or configuration error, 2 reproduction diff
outside tolerance.  Primary outputs are deterministic for a fixed seed; run
metadata with timestamps goes to a ``.meta.json`` sidecar.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from ._backend import BACKEND, set_threads
from .analysis import (PERCENT_CONVENTIONS, SamplePlan, consistency_study, crossover_study,
                       nl_census, reachability_study, transition_study)
from .operators import CrossoverKind, MutationKind, parse_ops
from .reproduce import GOLDEN_FILES, reproduce
from .search import ConfigInvalid, GaConfig, LsConfig, experiment

EXIT_OK, EXIT_USAGE, EXIT_DIFF = 0, 1, 2
OUT_ENV = "BOOLNL_OUT"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_flags(p, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="master seed (default 0)")
    p.add_argument("--threads", type=int, default=d(None), help="cap on worker threads/processes")
    p.add_argument("--out", default=d(None), help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--format", choices=("csv", "json"), default=d(None),
                   help="write only this format (default: both)")


def _plan_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exhaustive", action="store_true", help="visit every function")
    g.add_argument("--fraction", type=float, help="sample this fraction of the space")
    g.add_argument("--count", type=int, help="sample this many functions")
    p.add_argument("--allow-large-exhaustive", action="store_true",
                   help="permit exhaustive enumeration at n=5")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    parser = _Parser(prog="boolnl", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    an = sub.add_parser("analyze", help="operator studies", parents=[common])
    asub = an.add_subparsers(dest="study", required=True, parser_class=_Parser)
    c = asub.add_parser("consistency", parents=[common], help="spectrum-change consistency")
    c.add_argument("--op", required=True)
    c.add_argument("--n", type=int, required=True)
    _plan_flags(c)
    t = asub.add_parser("transitions", parents=[common], help="nl transition probabilities")
    t.add_argument("--op", required=True)
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--percent", choices=PERCENT_CONVENTIONS, default=None,
                   help="integer-percent convention of the CSV view")
    t.add_argument("--no-collapse", action="store_true", help="keep per-position rows")
    _plan_flags(t)
    r = asub.add_parser("reachability", parents=[common], help="success-pattern census")
    r.add_argument("--n", type=int, required=True)
    _plan_flags(r)
    x = asub.add_parser("crossover", parents=[common], help="crossover success matrix")
    x.add_argument("--kind", required=True)
    x.add_argument("--n", type=int, required=True)
    x.add_argument("--pairs-per-cell", type=int, default=10_000)
    _plan_flags(x)

    s = sub.add_parser("search", parents=[common], help="run GA / LS / LS-R experiments")
    s.add_argument("--algo", choices=("ga", "ls", "ls-r"), action="append",
                   help="algorithm (repeatable)")
    s.add_argument("--fitness", type=int, choices=(1, 2), action="append",
                   help="fitness variant (repeatable)")
    s.add_argument("--ops", action="append", help="LS operator order, e.g. 2bit/bit (repeatable)")
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--budget", type=int, default=500_000)
    s.add_argument("--runs", type=int, default=30)
    s.add_argument("--crossover", default="uniform", help="GA crossover: uniform or singlepoint")
    s.add_argument("--ga-mutations", default="bit/2bit/mix")
    s.add_argument("--population", type=int, default=100)
    s.add_argument("--mutation-probability", type=float, default=0.5)
    s.add_argument("--no-restart", action="store_true", help="LS: single descent per run")
    s.add_argument("--canonical-order", action="store_true", help="LS: unshuffled positions")
    s.add_argument("--single-level", action="store_true", help="LS-R: one-step backtrack")
    s.add_argument("--trajectory-every", type=int, default=1)
    s.add_argument("--no-timing", action="store_true", help="omit wall-clock seconds")

    rp = sub.add_parser("reproduce", parents=[common], help="diff a study against its reference table")
    rp.add_argument("--table", type=int, required=True, choices=sorted(GOLDEN_FILES))
    rp.add_argument("--pairs-per-cell", type=int, default=None)
    rp.add_argument("--fraction", type=float, default=None)
    rp.add_argument("--count", type=int, default=None)

    ce = sub.add_parser("census", parents=[common], help="nonlinearity distribution")
    ce.add_argument("--n", type=int, required=True)
    _plan_flags(ce)
    return parser


# ---------------------------------------------------------------- output

class Writer:
    def __init__(self, args):
        self.dir = Path(args.out or os.environ.get(OUT_ENV) or ".")
        self.dir.mkdir(parents=True, exist_ok=True)
        self.fmt = args.format
        self.files = []

    def csv(self, stem, rows):
        if self.fmt in (None, "csv"):
            path = self.dir / f"{stem}.csv"
            with open(path, "w", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerows(rows)
            self.files.append(str(path))

    def json(self, stem, doc, force=False):
        if force or self.fmt in (None, "json"):
            path = self.dir / f"{stem}.json"
            path.write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n")
            self.files.append(str(path))

    def meta(self, stem, args, started, extra=None):
        doc = {
            "command": sys.argv[1:] if args.argv is None else args.argv,
            "arguments": {k: v for k, v in vars(args).items() if k not in ("argv", "func")},
            "seed": args.seed, "version": __version__, "backend": BACKEND,
            "python": platform.python_version(),
            "started": datetime.fromtimestamp(started, timezone.utc).isoformat(),
            "seconds": round(time.time() - started, 3),
            "outputs": list(self.files),
        }
        if extra:
            doc.update(extra)
        path = self.dir / f"{stem}.meta.json"
        path.write_text(json.dumps(doc, indent=1, default=str) + "\n")


def _plan(args, n):
    if getattr(args, "fraction", None) is not None or getattr(args, "count", None) is not None:
        plan = SamplePlan.sampled(fraction=args.fraction, count=args.count, seed=args.seed)
    elif getattr(args, "exhaustive", False) or n <= 4:
        plan = SamplePlan.exhaustive(seed=args.seed,
                                     allow_large_exhaustive=args.allow_large_exhaustive)
    else:
        plan = SamplePlan.sampled(fraction=0.01, seed=args.seed)
    try:
        plan.validate(n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return plan


def _kind(text):
    try:
        return MutationKind.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- commands

def cmd_analyze(args, out):
    n = args.n
    plan = _plan(args, n)
    if args.study == "consistency":
        kind = _kind(args.op)
        if kind == MutationKind.ROTATION:
            raise UsageError("consistency is defined for bit operators only")
        rep = consistency_study(kind, n, plan)
        stem = f"table2_{kind.token}_n{n}"
        out.csv(stem, rep.csv_rows())
        out.json(stem, rep.to_json())
    elif args.study == "transitions":
        kind = _kind(args.op)
        table = transition_study(kind, n, plan, collapse=False if args.no_collapse else None)
        stem = f"table{4 if kind == MutationKind.ROTATION else 3}_{kind.token}_n{n}"
        convention = args.percent or ("floor" if table.per_position else "floor-balanced")
        out.csv(stem, table.csv_rows(convention))
        out.json(stem, table.to_json())
    elif args.study == "reachability":
        census = reachability_study(n, plan)
        stem = f"table{5 if plan.mode == 'exhaustive' else 6}_n{n}"
        out.csv(stem, census.csv_rows())
        out.json(stem, census.to_json())
    else:
        try:
            kind = CrossoverKind.parse(args.kind)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if args.pairs_per_cell < 1:
            raise UsageError("--pairs-per-cell must be positive")
        if n > 4 and plan.mode == "exhaustive":
            raise UsageError("crossover above n=4 needs --fraction or --count")
        mat = crossover_study(kind, n, plan, args.pairs_per_cell)
        prefix = {CrossoverKind.SINGLE_POINT_MID: "table7", CrossoverKind.UNIFORM_EVEN_ODD: "table8"}
        stem = f"{prefix.get(kind, 'crossover')}_{kind.value}_n{n}"
        out.csv(stem, mat.csv_rows())
        out.json(stem, mat.to_json())
    return stem, EXIT_OK, None


def _search_configs(args):
    algos = args.algo or ["ls"]
    fits = args.fitness or [1]
    combos = args.ops or ["2bit/bit"]
    cfgs = []
    for algo in algos:
        for f in fits:
            if algo == "ga":
                cfgs.append(GaConfig(
                    n=args.n, budget=args.budget, seed=args.seed, fitness=f,
                    population_size=args.population,
                    crossover=CrossoverKind.parse(args.crossover),
                    mutation_ops=tuple(args.ga_mutations.split("/")),
                    mutation_probability=args.mutation_probability))
                continue
            for ops in combos:
                cfgs.append(LsConfig(
                    n=args.n, operator_sequence=tuple(parse_ops(ops)), revert=algo == "ls-r",
                    fitness=f, budget=args.budget, seed=args.seed,
                    restart_on_convergence=not args.no_restart,
                    randomized_order=not args.canonical_order,
                    single_level=args.single_level))
    return cfgs


def cmd_search(args, out):
    if args.runs < 1:
        raise UsageError("--runs must be at least 1")
    if args.trajectory_every < 1:
        raise UsageError("--trajectory-every must be at least 1")
    try:
        cfgs = _search_configs(args)
        for c in cfgs:
            c.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = experiment(cfgs, args.runs, workers=args.threads or 1)
    stem = f"search_n{args.n}"
    out.csv(stem + "_summary", res.csv_rows(timing=not args.no_timing))
    records = {}
    for cid, recs in res.records.items():
        docs = []
        for r in recs:
            d = r.to_json(args.trajectory_every)
            if args.no_timing:
                d["seconds"] = None
            docs.append(d)
        records[cid] = docs
    out.json(stem + "_summary", {"summaries": [s.to_json() for s in res.summaries]})
    out.json(stem + "_runs", records)
    for s in res.summaries:
        print(f"{s.config_id}: min {s.minimum} mean {s.mean:.2f} median {s.median} max {s.maximum}")
    return stem, EXIT_OK, None


def cmd_reproduce(args, out):
    params = {}
    if args.pairs_per_cell is not None:
        params["pairs_per_cell"] = args.pairs_per_cell
    if args.table == 6:
        if args.count is not None:
            params["count"] = args.count
        elif args.fraction is not None:
            params["fraction"] = args.fraction
    rep = reproduce(args.table, seed=args.seed, **params)
    stem = f"reproduce_table{args.table}"
    out.csv(stem, rep.computed)
    out.json(stem, rep.to_json(), force=True)
    print(rep.summary())
    for c in rep.failures()[:40]:
        print(f"  row {c.row} col {c.column}: expected {c.expected}, got {c.actual}")
    status = "MATCH" if rep.ok else "DIFF"
    print(status)
    return stem, EXIT_OK if rep.ok else EXIT_DIFF, {"ok": rep.ok}


def cmd_census(args, out):
    plan = _plan(args, args.n)
    counts = nl_census(args.n, plan)
    stem = f"census_n{args.n}"
    out.csv(stem, [["nl", "count"]] + [[str(k), str(v)] for k, v in counts.items()])
    out.json(stem, {"study": "census", "n": args.n, "plan": plan.to_json(),
                    "counts": {str(k): v for k, v in counts.items()}})
    return stem, EXIT_OK, None


COMMANDS = {"analyze": cmd_analyze, "search": cmd_search,
            "reproduce": cmd_reproduce, "census": cmd_census}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = list(argv) if argv is not None else None
    started = time.time()
    try:
        set_threads(args.threads)
        out = Writer(args)
        stem, status, extra = COMMANDS[args.command](args, out)
    except (UsageError, ConfigInvalid) as exc:
        print(f"boolnl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.meta(stem, args, started, extra)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
