import dataclasses
import json
import statistics

import numpy as np
import pytest

from boolnl.analysis import PATTERN_ROWS, nl_of_words, reachability_study
from boolnl.core import TruthTable, fitness1, fitness2
from boolnl.operators import CrossoverKind, MutationKind
from boolnl.search import (ConfigInvalid, GaConfig, LsConfig, experiment, ga_run, ls_revert_run,
                           ls_run, random_function, run_config)

import oracles

OPS_NAMES = {MutationKind.BIT_FLIP: "bit", MutationKind.TWO_BIT_FLIP: "2bit",
             MutationKind.ROTATION: "rot"}


def fitness_of(rec, f):
    return (fitness2 if f == 2 else fitness1)(rec.best)


class TestConfigs:
    def test_ls_validation(self):
        with pytest.raises(ConfigInvalid):
            LsConfig(operator_sequence=()).validate()
        with pytest.raises(ConfigInvalid):
            LsConfig(operator_sequence="bit/bit").validate()
        with pytest.raises(ConfigInvalid):
            LsConfig(fitness=3).validate()
        with pytest.raises(ConfigInvalid):
            LsConfig(single_level=True).validate()
        with pytest.raises(ConfigInvalid):
            ls_run(LsConfig(revert=True))
        with pytest.raises(ConfigInvalid):
            ls_revert_run(LsConfig(revert=False))

    def test_ga_validation(self):
        with pytest.raises(ConfigInvalid):
            GaConfig(tournament_size=101).validate()
        with pytest.raises(ConfigInvalid):
            GaConfig(mutation_probability=1.5).validate()
        with pytest.raises(ConfigInvalid):
            GaConfig(crossover=CrossoverKind.SINGLE_POINT_MID).validate()
        with pytest.raises(ConfigInvalid):
            GaConfig(mutation_ops=("rot",))
        with pytest.raises(ConfigInvalid):
            GaConfig(budget=50).validate()

    def test_labels(self):
        assert LsConfig(operator_sequence="2bit/bit", fitness=2, revert=True).label() == "ls-r_f2_2bit/bit"
        assert GaConfig(fitness=1).label() == "ga_f1_uniform"


class TestRandomFunction:
    def test_reproducible(self):
        a = random_function(8, np.random.default_rng(5))
        b = random_function(8, np.random.default_rng(5))
        assert a == b
        assert a != random_function(8, np.random.default_rng(6))

    def test_weight(self):
        rng = np.random.default_rng(0)
        mean = statistics.fmean(random_function(8, rng).weight() for _ in range(1000))
        assert abs(mean - 128) <= 3 * 8


class TestLocalSearchAgainstOracle:
    """Canonical-order runs must match a full-transform reference step for step."""

    @pytest.mark.parametrize("n,ops,f2,revert,budget", [
        (3, "rot/bit/2bit", False, False, 10_000),
        (4, "bit/2bit/rot", False, False, 10_000),
        (4, "2bit/bit", True, False, 10_000),
        (4, "2bit/bit", True, True, 3_000),
        (4, "rot/bit", True, True, 3_000),
        (4, "bit/2bit", False, True, 2_000),
        (5, "2bit/bit", True, False, 700),
        (5, "bit/rot", True, True, 900),
    ])
    def test_matches(self, n, ops, f2, revert, budget):
        rng = np.random.default_rng(n * 100 + budget)
        for _ in range(6):
            start = random_function(n, rng)
            cfg = LsConfig(n=n, operator_sequence=ops, fitness=2 if f2 else 1, revert=revert,
                           budget=budget, restart_on_convergence=False, randomized_order=False)
            rec = (ls_revert_run if revert else ls_run)(cfg, start=start)
            names = [OPS_NAMES[k] for k in cfg.operator_sequence]
            best, best_rank, evals = oracles.local_search(start.bits.tolist(), names, budget, f2, revert)
            assert rec.evaluations == evals
            assert rec.best.bits.tolist() == best
            assert fitness_of(rec, cfg.fitness) == rec.best_fitness


class TestLocalSearch:
    def test_n4_converges_to_4_or_6(self):
        cfg = LsConfig(n=4, operator_sequence="rot/bit/2bit", budget=10**6,
                       restart_on_convergence=False)
        finals = {ls_run(dataclasses.replace(cfg, seed=s)).final_nl for s in range(200)}
        assert finals <= {4, 6}

    def test_n3_always_reaches_2(self):
        cfg = LsConfig(n=3, operator_sequence="rot/bit/2bit", budget=10**6,
                       restart_on_convergence=False)
        assert {ls_run(dataclasses.replace(cfg, seed=s)).final_nl for s in range(100)} == {2}

    def test_dead_end_start(self):
        words = np.arange(1 << 16, dtype=np.uint64)
        census_pat = None
        from boolnl.kernels import reach_patterns
        M, pat = reach_patterns(words, 4)
        dead = words[(pat == 0) & (M == 8)]
        assert dead.size == 1120
        start = TruthTable.from_int(int(dead[0]), 4)
        cfg = LsConfig(n=4, operator_sequence="rot/bit/2bit", budget=10**6,
                       restart_on_convergence=False)
        rec = ls_run(cfg, start=start)
        assert rec.final_nl == 4
        assert rec.stats["accepted_moves"] == 0 and rec.stats["converged_descents"] == 1
        assert rec.evaluations == 1 + 15 + 16 + 120

    def test_budget_respected_and_trajectory_monotone(self):
        for revert in (False, True):
            cfg = LsConfig(n=8, fitness=2, revert=revert, budget=7_777, seed=3)
            rec = run_config(cfg)
            assert rec.evaluations <= 7_777
            values = [f.value for _, f in rec.trajectory]
            assert values == sorted(values) and len(set(values)) == len(values)
            assert [e for e, _ in rec.trajectory] == sorted(e for e, _ in rec.trajectory)
            assert rec.trajectory[-1][1] == rec.best_fitness == fitness2(rec.best)

    def test_restart_uses_whole_budget(self):
        cfg = LsConfig(n=4, operator_sequence="bit", budget=5_000, seed=1)
        rec = ls_run(cfg)
        assert rec.evaluations == 5_000 and rec.stats["descents"] > 1

    def test_revert_chain_bounded_by_accepts(self):
        for s in range(10):
            rec = ls_revert_run(LsConfig(n=5, fitness=2, revert=True, budget=20_000, seed=s,
                                         restart_on_convergence=False))
            assert rec.stats["max_chain_depth"] <= rec.stats["accepted_moves"]

    def test_single_level_mode(self):
        cfg = LsConfig(n=6, fitness=2, revert=True, single_level=True, budget=50_000, seed=2,
                       restart_on_convergence=False)
        rec = ls_revert_run(cfg)
        assert rec.stats["max_chain_depth"] <= 1

    def test_revert_pays_more_and_is_no_worse(self):
        for s in range(15):
            base = LsConfig(n=5, operator_sequence="2bit/bit", fitness=2, budget=50_000, seed=s,
                            restart_on_convergence=False)
            a = ls_run(base)
            b = ls_revert_run(dataclasses.replace(base, revert=True))
            assert b.evaluations >= a.evaluations
            assert b.best_fitness >= a.best_fitness

    def test_fitness2_beats_fitness1_at_n4(self):
        hits = {}
        for f in (1, 2):
            cfg = LsConfig(n=4, operator_sequence="2bit/bit", fitness=f, budget=10**6,
                           restart_on_convergence=False)
            hits[f] = sum(ls_run(dataclasses.replace(cfg, seed=s)).final_nl == 6 for s in range(30))
        assert hits[2] > hits[1]

    def test_revert_mean_at_least_ls_n4(self):
        means = {}
        for revert in (False, True):
            cfg = LsConfig(n=4, operator_sequence="2bit/bit", fitness=2, revert=revert,
                           budget=10**6, restart_on_convergence=False)
            means[revert] = statistics.fmean(run_config(dataclasses.replace(cfg, seed=s)).final_nl
                                             for s in range(30))
        assert means[True] >= means[False]

    def test_seeded_determinism(self):
        cfg = LsConfig(n=7, fitness=2, budget=20_000, seed=11)
        a, b = ls_run(cfg), ls_run(cfg)
        assert a.best == b.best and a.evaluations == b.evaluations
        assert a.trajectory == b.trajectory


class TestGa:
    def test_init_only(self):
        rec = ga_run(GaConfig(n=6, budget=100, seed=1))
        assert rec.evaluations == 100
        assert all(e <= 100 for e, _ in rec.trajectory)

    def test_best_and_budget(self):
        for f in (1, 2):
            for kind in (CrossoverKind.UNIFORM_RANDOM, CrossoverKind.SINGLE_POINT_RANDOM):
                rec = ga_run(GaConfig(n=6, budget=3_000, seed=4, fitness=f, crossover=kind))
                assert rec.evaluations == 3_000
                assert rec.best_fitness == fitness_of(rec, f)
                values = [v.value for _, v in rec.trajectory]
                assert values == sorted(values)

    def test_n4_reaches_optimum(self):
        hits = sum(ga_run(GaConfig(n=4, budget=5_000, seed=s)).final_nl == 6 for s in range(10))
        assert hits >= 9

    def test_mutation_only_paths(self):
        rec = ga_run(GaConfig(n=5, budget=1_000, seed=0, mutation_ops=("mix",), mutation_probability=1))
        assert rec.evaluations == 1_000


class TestExperiment:
    def test_single_run_summary(self):
        res = experiment([LsConfig(n=5, budget=500, seed=1)], runs=1)
        (s,) = res.summaries
        rec = res.records[s.config_id][0]
        assert s.minimum == s.maximum == s.mean == s.median == rec.final_nl

    def test_paired_seeds(self):
        a = LsConfig(n=5, operator_sequence="2bit/bit", fitness=2, budget=3_000, seed=4,
                     restart_on_convergence=False)
        res = experiment([a, dataclasses.replace(a, revert=True)], runs=4)
        ls_recs, lsr_recs = res.records.values()
        for x, y in zip(ls_recs, lsr_recs):
            # identical paths until the plain search stops, so the same start table
            assert x.trajectory[0][1] == y.trajectory[0][1]
            assert y.best_fitness >= x.best_fitness

    def test_invalid_runs(self):
        with pytest.raises(ConfigInvalid):
            experiment([LsConfig()], runs=0)

    def test_csv_and_json(self):
        res = experiment([LsConfig(n=4, budget=300), GaConfig(n=4, budget=300)], runs=2)
        rows = res.csv_rows()
        assert rows[0] == ["config-id", "run-id", "final-nl", "final-fitness", "evaluations", "seconds"]
        assert len(rows) == 5
        assert all(r[5] == "" for r in res.csv_rows(timing=False)[1:])
        rec = res.records[rows[1][0]][0]
        doc = json.loads(json.dumps(rec.to_json(every=2)))
        assert doc["trajectory"][-1]["fitness"] == str(rec.best_fitness.value)
        assert doc["best"] == rec.best.to_hex()
        json.dumps([s.to_json() for s in res.summaries])

    def test_workers_match_serial(self):
        cfg = LsConfig(n=5, budget=2_000, seed=9)
        a = experiment([cfg], runs=3)
        b = experiment([cfg], runs=3, workers=2)
        assert [r.best for r in a.records[cfg.label()]] == [r.best for r in b.records[cfg.label()]]
