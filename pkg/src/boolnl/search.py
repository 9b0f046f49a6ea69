"""Steady-state GA, greedy first-improvement local search and its reverting variant.

Every fitness computation costs one evaluation.  Fitness is compared through
the integer pair ``(max|W|, multiplicity)``: lower is better, the second
component only counts under fitness 2.  This is the same order as the exact
rational fitness values, without any floating point in the loops.
"""

from __future__ import annotations

import dataclasses
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import FitnessValue, TruthTable, fitness_from_max_count
from .operators import (CrossoverKind, MutationKind, crossover_bits, format_ops,
                        mix_bits, parse_ops)

MIXING = "mix"
GA_MUTATIONS = {"bitflip": MutationKind.BIT_FLIP, "bit": MutationKind.BIT_FLIP,
                "2bitflip": MutationKind.TWO_BIT_FLIP, "2bit": MutationKind.TWO_BIT_FLIP,
                "mix": MIXING, "mixing": MIXING}
SEARCH_MAX_N = 16


class ConfigInvalid(ValueError):
    pass


def _check_common(n, fitness, budget):
    if not 1 <= n <= SEARCH_MAX_N:
        raise ConfigInvalid(f"n must be in [1, {SEARCH_MAX_N}]")
    if fitness not in (1, 2):
        raise ConfigInvalid("fitness must be 1 or 2")
    if budget < 1:
        raise ConfigInvalid("budget must be positive")


@dataclass(frozen=True)
class GaConfig:
    n: int = 8
    budget: int = 500_000
    seed: int = 0
    fitness: int = 1
    population_size: int = 100
    tournament_size: int = 3
    crossover: CrossoverKind = CrossoverKind.UNIFORM_RANDOM
    mutation_ops: tuple = (MutationKind.BIT_FLIP, MutationKind.TWO_BIT_FLIP, MIXING)
    mutation_probability: float = 0.5

    algorithm = "ga"

    def __post_init__(self):
        object.__setattr__(self, "crossover", CrossoverKind(self.crossover))
        ops = []
        for op in self.mutation_ops:
            if isinstance(op, str):
                if op.lower() not in GA_MUTATIONS:
                    raise ConfigInvalid(f"unknown GA mutation {op!r}")
                op = GA_MUTATIONS[op.lower()]
            ops.append(op)
        object.__setattr__(self, "mutation_ops", tuple(ops))

    def validate(self):
        _check_common(self.n, self.fitness, self.budget)
        if self.tournament_size < 3:
            raise ConfigInvalid("tournament needs at least 3 individuals")
        if self.tournament_size > self.population_size:
            raise ConfigInvalid("tournament_size exceeds population_size")
        if not 0 <= self.mutation_probability <= 1:
            raise ConfigInvalid("mutation_probability must be in [0, 1]")
        if self.crossover.deterministic:
            raise ConfigInvalid("GA crossover must be singlepoint or uniform")
        if not self.mutation_ops:
            raise ConfigInvalid("mutation_ops is empty")
        for op in self.mutation_ops:
            if op not in (MutationKind.BIT_FLIP, MutationKind.TWO_BIT_FLIP, MIXING):
                raise ConfigInvalid(f"GA mutation {op!r} not supported")
        if self.budget < self.population_size:
            raise ConfigInvalid("budget must cover the initial population")
        return self

    def label(self):
        return f"ga_f{self.fitness}_{self.crossover.value}"

    def to_json(self):
        return {"algorithm": "ga", "n": self.n, "budget": self.budget, "seed": self.seed,
                "fitness": self.fitness, "population_size": self.population_size,
                "tournament_size": self.tournament_size, "crossover": self.crossover.value,
                "mutation_ops": [op if op == MIXING else op.token for op in self.mutation_ops],
                "mutation_probability": self.mutation_probability}


@dataclass(frozen=True)
class LsConfig:
    n: int = 8
    operator_sequence: tuple = (MutationKind.TWO_BIT_FLIP, MutationKind.BIT_FLIP)
    revert: bool = False
    fitness: int = 1
    budget: int = 500_000
    seed: int = 0
    restart_on_convergence: bool = True
    randomized_order: bool = True
    single_level: bool = False

    def __post_init__(self):
        seq = self.operator_sequence
        if isinstance(seq, str):
            seq = parse_ops(seq)
        object.__setattr__(self, "operator_sequence",
                           tuple(MutationKind.parse(k) if isinstance(k, str) else MutationKind(k)
                                 for k in seq))

    @property
    def algorithm(self):
        return "ls-r" if self.revert else "ls"

    def validate(self):
        _check_common(self.n, self.fitness, self.budget)
        seq = self.operator_sequence
        if not seq:
            raise ConfigInvalid("operator_sequence is empty")
        if len(set(seq)) != len(seq):
            raise ConfigInvalid("operator_sequence has duplicates")
        if self.single_level and not self.revert:
            raise ConfigInvalid("single_level only applies with revert")
        return self

    def label(self):
        return f"{self.algorithm}_f{self.fitness}_{format_ops(self.operator_sequence)}"

    def to_json(self):
        return {"algorithm": self.algorithm, "n": self.n, "budget": self.budget,
                "seed": self.seed, "fitness": self.fitness,
                "operator_sequence": format_ops(self.operator_sequence),
                "revert": self.revert, "restart_on_convergence": self.restart_on_convergence,
                "randomized_order": self.randomized_order, "single_level": self.single_level}


@dataclass
class RunRecord:
    algorithm: str
    config: dict
    trajectory: list            # (evaluation index, best-so-far FitnessValue)
    best: TruthTable
    best_fitness: FitnessValue
    evaluations: int
    seconds: float
    stats: dict = field(default_factory=dict)

    @property
    def final_nl(self):
        return self.best_fitness.nl

    def to_json(self, every=1):
        traj = self.trajectory
        if every > 1 and traj:
            # keep every k-th improvement and always the last one
            traj = traj[::every] + ([traj[-1]] if (len(traj) - 1) % every else [])
        return {
            "algorithm": self.algorithm, "config": self.config,
            "final_nl": self.final_nl, "final_fitness": str(self.best_fitness.value),
            "best": self.best.to_hex(), "evaluations": self.evaluations,
            "seconds": self.seconds, "stats": self.stats,
            "trajectory": [{"evaluation": e, "nl": f.nl, "fitness": str(f.value)} for e, f in traj],
        }


def random_function(n, rng) -> TruthTable:
    return TruthTable(n, rng.integers(0, 2, 1 << n, dtype=np.uint8))


def _rank(M, cnt, f2):
    """Smaller is better."""
    return (M, cnt) if f2 else (M, 0)


# ---------------------------------------------------------------- GA

def ga_run(cfg: GaConfig, rng=None) -> RunRecord:
    cfg.validate()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    t0 = time.perf_counter()
    n, L, P = cfg.n, 1 << cfg.n, cfg.population_size
    f2 = cfg.fitness == 2
    pop = rng.integers(0, 2, (P, L), dtype=np.uint8)
    W = kernels.spectra_rows(pop)
    A = np.abs(W)
    M = A.max(axis=1).astype(np.int64)
    cnt = (A == M[:, None]).sum(axis=1).astype(np.int64)
    # integer score, larger is better: L * fitness value
    score = (L // 2 - M // 2) * L + ((L - cnt) if f2 else 0)
    evals = P

    trajectory = []
    best_i = 0
    best_score = None
    for k in range(P):
        if best_score is None or score[k] > best_score:
            best_score, best_i = int(score[k]), k
            trajectory.append((k + 1, fitness_from_max_count(n, M[k], cnt[k], cfg.fitness)))
    best_bits = pop[best_i].copy()
    best_key = (int(M[best_i]), int(cnt[best_i]))

    wbuf = np.empty(L, np.int32)
    ops = cfg.mutation_ops
    while evals < cfg.budget:
        idx = rng.choice(P, cfg.tournament_size, replace=False)
        s = score[idx]
        worst = idx[s == s.min()]
        w = worst[rng.integers(worst.size)] if worst.size > 1 else worst[0]
        pa, pb = [int(i) for i in idx if i != w][:2]
        child = crossover_bits(pop[pa], pop[pb], cfg.crossover, rng)
        if rng.random() < cfg.mutation_probability:
            op = ops[rng.integers(len(ops))]
            if op == MIXING:
                child = mix_bits(child, rng)
            elif op == MutationKind.BIT_FLIP:
                child[rng.integers(L)] ^= 1
            else:
                child[rng.choice(L, 2, replace=False)] ^= 1
        kernels.spectrum_into(child, wbuf)
        m, c = kernels.max_count(wbuf)
        evals += 1
        pop[w] = child
        M[w], cnt[w] = m, c
        score[w] = (L // 2 - m // 2) * L + ((L - c) if f2 else 0)
        if score[w] > best_score:
            best_score = int(score[w])
            best_bits = child.copy()
            best_key = (int(m), int(c))
            trajectory.append((evals, fitness_from_max_count(n, m, c, cfg.fitness)))

    return RunRecord("ga", cfg.to_json(), trajectory, TruthTable(n, best_bits),
                     fitness_from_max_count(n, *best_key, cfg.fitness), evals,
                     time.perf_counter() - t0, {})


# ---------------------------------------------------------------- local search

def _ls_any(cfg: LsConfig, rng=None, start=None) -> RunRecord:
    cfg.validate()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    t0 = time.perf_counter()
    n, L = cfg.n, 1 << cfg.n
    f2 = cfg.fitness == 2
    par = kernels.parity_table(L)
    if any(k.is_pair for k in cfg.operator_sequence):
        pair_i, pair_j = kernels.pair_tables(L)
    else:
        pair_i = pair_j = np.zeros(1, np.int64)
    ops = np.array([int(k) for k in cfg.operator_sequence], np.int64)
    max_depth = 1 if cfg.single_level else 0

    evals = 0
    best = None                 # (rank, bits, M, cnt)
    trajectory = []
    descents = converged_runs = accepts = max_chain = 0
    while evals < cfg.budget:
        if start is not None and descents == 0:
            if start.n != n:
                raise ConfigInvalid(f"start table has n={start.n}, config has n={n}")
            bits = np.array(start.bits, dtype=np.uint8)
        else:
            bits = rng.integers(0, 2, L, dtype=np.uint8)
        run_key = int(rng.integers(0, 1 << 32))
        W = np.empty(L, np.int32)
        kernels.spectrum_into(bits, W)
        evals += 1
        room = cfg.budget - evals + 1
        best_bits = np.empty(L, np.uint8)
        t_e = np.empty(room, np.int64)
        t_m = np.empty(room, np.int64)
        t_c = np.empty(room, np.int64)
        evals, ntraj, bm, bc, acc, depth, conv = kernels.ls_drive(
            bits, W, ops, cfg.budget, evals, f2, cfg.revert, max_depth,
            cfg.randomized_order, run_key, pair_i, pair_j, par, best_bits, t_e, t_m, t_c)
        descents += 1
        converged_runs += int(conv)
        accepts += int(acc)
        max_chain = max(max_chain, int(depth))
        prev = best[0] if best else None
        for k in range(ntraj):
            r = _rank(int(t_m[k]), int(t_c[k]), f2)
            if prev is None or r < prev:
                prev = r
                trajectory.append((int(t_e[k]), fitness_from_max_count(n, t_m[k], t_c[k], cfg.fitness)))
        if best is None or _rank(int(bm), int(bc), f2) < best[0]:
            best = (_rank(int(bm), int(bc), f2), best_bits.copy(), int(bm), int(bc))
        if not (cfg.restart_on_convergence and conv):
            break

    _, bits, m, c = best
    stats = {"descents": descents, "converged_descents": converged_runs,
             "accepted_moves": accepts, "max_chain_depth": max_chain}
    return RunRecord(cfg.algorithm, cfg.to_json(), trajectory, TruthTable(n, bits),
                     fitness_from_max_count(n, m, c, cfg.fitness), evals,
                     time.perf_counter() - t0, stats)


def ls_run(cfg: LsConfig, rng=None, start=None) -> RunRecord:
    """Greedy first-improvement LS; ``start`` fixes the first descent's table."""
    if cfg.revert:
        raise ConfigInvalid("ls_run needs revert=False; use ls_revert_run")
    return _ls_any(cfg, rng, start)


def ls_revert_run(cfg: LsConfig, rng=None, start=None) -> RunRecord:
    if not cfg.revert:
        raise ConfigInvalid("ls_revert_run needs revert=True")
    return _ls_any(cfg, rng, start)


def run_config(cfg, rng=None) -> RunRecord:
    if isinstance(cfg, GaConfig):
        return ga_run(cfg, rng)
    return _ls_any(cfg, rng)


# ---------------------------------------------------------------- experiments

def derive_seed(seed, run):
    """Per-run seed; the same (seed, run) pair gives paired runs across configs."""
    return int(np.random.SeedSequence([int(seed), int(run)]).generate_state(1, np.uint64)[0])


@dataclass
class ConfigSummary:
    config_id: str
    runs: int
    final_nl: list

    @property
    def minimum(self):
        return min(self.final_nl)

    @property
    def maximum(self):
        return max(self.final_nl)

    @property
    def mean(self):
        return statistics.fmean(self.final_nl)

    @property
    def median(self):
        return statistics.median(self.final_nl)

    def box(self):
        """Box-plot five-number summary plus mean."""
        q = np.percentile(self.final_nl, [0, 25, 50, 75, 100])
        return {"min": float(q[0]), "q1": float(q[1]), "median": float(q[2]),
                "q3": float(q[3]), "max": float(q[4]), "mean": self.mean}

    def to_json(self):
        return {"config_id": self.config_id, "runs": self.runs, "final_nl": self.final_nl,
                "min": self.minimum, "mean": self.mean, "median": self.median,
                "max": self.maximum, "box": self.box()}


@dataclass
class ExperimentResult:
    records: dict               # config-id -> list of RunRecord
    summaries: list

    def summary(self, config_id):
        return next(s for s in self.summaries if s.config_id == config_id)

    def csv_rows(self, timing=True):
        rows = [["config-id", "run-id", "final-nl", "final-fitness", "evaluations", "seconds"]]
        for cid, recs in self.records.items():
            for run, r in enumerate(recs):
                rows.append([cid, str(run), str(r.final_nl), str(r.best_fitness.value),
                             str(r.evaluations), f"{r.seconds:.3f}" if timing else ""])
        return rows


def _one(args):
    cfg, run = args
    return run_config(dataclasses.replace(cfg, seed=derive_seed(cfg.seed, run)))


def experiment(configs, runs, n=None, workers=1, on_record=None) -> ExperimentResult:
    """Run every config ``runs`` times with derived, paired seeds."""
    if runs < 1:
        raise ConfigInvalid("runs must be at least 1")
    configs = [dataclasses.replace(c, n=n) if n is not None else c for c in configs]
    for c in configs:
        c.validate()
    ids = []
    for c in configs:
        cid = c.label()
        while cid in ids:
            cid += "'"
        ids.append(cid)
    jobs = [(c, run) for c in configs for run in range(runs)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_one, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_one(job))
            if on_record:
                on_record(job, results[-1])
    records = {cid: results[k * runs:(k + 1) * runs] for k, cid in enumerate(ids)}
    summaries = [ConfigSummary(cid, runs, [r.final_nl for r in recs]) for cid, recs in records.items()]
    return ExperimentResult(records, summaries)
