import re

import numpy as np
import pytest

from setmargin import solver
from setmargin.bench import gen_synthetic
from setmargin.milp import (Hyperparameters, INDIFFERENT, Preference,
                            PreferenceDataset, STRICT, UnboundedRisk,
                            build_model, export_debug, recommend, solve,
                            solve_setmargin)
from setmargin.problem import (Attribute, ProblemSpec, WeightBounds, encode,
                               enumerate_feasible, is_feasible, utility)
from setmargin.solver import SolverConfig
from setmargin.users import noiseless_user

from oracles import (exhaustive_setmargin, random_dataset, random_small_spec,
                     tuple_lp)

EXACT = SolverConfig(gap_tolerance=0.0)


def binary_pair_spec():
    """One cardinality-2 attribute: two features, two configurations."""
    return ProblemSpec([Attribute("a", 2)], bounds=WeightBounds([0, 0], [1, 1]))


def tiny_instance():
    spec = binary_pair_spec()
    a, b = encode(spec, (0,)), encode(spec, (1,))
    return spec, PreferenceDataset([Preference(a, b)])


class TestBuildModel:
    def test_variable_count(self):
        spec = gen_synthetic(3)
        ds = PreferenceDataset([Preference(encode(spec, (0, 0, 0)), encode(spec, (1, 1, 1)))])
        for k in (1, 2, 3):
            sm = build_model(spec, ds, k, Hyperparameters(1, 0, 0))
            m, n = spec.m, len(ds)
            assert sm.model.num_vars == 1 + k * m + k * n + k * m + k * k * m

    def test_empty_dataset_has_only_diversity_ranking_rows(self):
        spec = binary_pair_spec()
        sm = build_model(spec, PreferenceDataset(), 2, Hyperparameters(1, 0, 0))
        names = sm.model.row_names
        assert not any(nm.startswith("pref_") for nm in names)
        assert sum(nm.startswith("div_") for nm in names) == 2

    def test_row_census(self):
        spec, ds = tiny_instance()
        k, m, n = 2, spec.m, len(ds)
        sm = build_model(spec, ds, k, Hyperparameters(1, 0, 1))
        names = sm.model.row_names
        assert sum(nm.startswith("pref_") for nm in names) == k * n
        assert sum(nm.startswith("div_") for nm in names) == k * (k - 1)
        assert sum(nm.startswith("pdiag_") for nm in names) == 2 * k * m
        assert sum(nm.startswith("poff_") for nm in names) == k * (k - 1) * m
        assert sum(nm.startswith("onehot_") for nm in names) == k * spec.n_attributes

    def test_indifference_shares_slack(self):
        spec = binary_pair_spec()
        a, b = encode(spec, (0,)), encode(spec, (1,))
        ds = PreferenceDataset([Preference(a, b, INDIFFERENT)])
        sm = build_model(spec, ds, 1, Hyperparameters(1, 0, 0))
        pos = [nm for nm in sm.model.row_names if nm.startswith("ind_pos")]
        neg = [nm for nm in sm.model.row_names if nm.startswith("ind_neg")]
        assert len(pos) == len(neg) == 1

    def test_k1_low_alpha_rejected(self):
        spec, ds = tiny_instance()
        with pytest.raises(UnboundedRisk):
            build_model(spec, ds, 1, Hyperparameters(0.5, 0, 0))

    def test_unreduced_spec_rejected(self):
        from setmargin.problem import CostMatrix
        cost = CostMatrix([[1.0, 2.0]], ("price",))
        spec = ProblemSpec([Attribute("a", 2)], cost=cost,
                           bounds=WeightBounds([0, 0], [1, 1], [0.0], [1.0]))
        with pytest.raises(ValueError, match="reduce"):
            build_model(spec, PreferenceDataset(), 1, Hyperparameters(1, 0, 0))


class TestSolveTiny:
    def test_tiny_objective_and_weights(self):
        # single strict preference, alpha=1, beta=gamma=0: optimum value 1,
        # only w=(1,0) attains margin-minus-slack 1
        spec, ds = tiny_instance()
        sol = solve_setmargin(spec, ds, 1, Hyperparameters(1, 0, 0), EXACT)
        assert sol.objective == pytest.approx(1.0, abs=1e-6)
        assert sol.weights[0] == pytest.approx([1.0, 0.0], abs=1e-6)
        assert sol.margin - sol.slacks[0, 0] == pytest.approx(1.0, abs=1e-6)

    def test_tiny_matches_lp_oracle(self):
        spec, ds = tiny_instance()
        hp = Hyperparameters(1, 0, 0)
        sol = solve_setmargin(spec, ds, 1, hp, EXACT)
        best, _ = exhaustive_setmargin(spec, enumerate_feasible(spec, 10), ds, 1, hp)
        assert sol.objective == pytest.approx(best, abs=1e-6)

    def test_k2_diverse_configs(self):
        spec = binary_pair_spec()
        sol = solve_setmargin(spec, PreferenceDataset(), 2, Hyperparameters(1, 0, 1), EXACT)
        assert sol.configs[0] != sol.configs[1]
        assert sol.margin > 0
        for i, j in ((0, 1), (1, 0)):
            sep = float(sol.weights[i] @ (sol.configs[i].bits - sol.configs[j].bits))
            assert sep >= sol.margin - 1e-6

    def test_diagonal_products_exact(self):
        spec = binary_pair_spec()
        for gamma in (0.0, 1.0):
            sol = solve_setmargin(spec, PreferenceDataset(), 2,
                                  Hyperparameters(1, 0, gamma), EXACT)
            for i in range(2):
                expect = sol.weights[i] * sol.configs[i].bits
                assert np.allclose(sol.products[i, i], expect, atol=1e-6)

    def test_every_config_feasible_and_bounded(self):
        rng = np.random.default_rng(5)
        for trial in range(5):
            spec = random_small_spec(rng)
            feas = enumerate_feasible(spec, 100)
            ds = random_dataset(rng, feas)
            hp = Hyperparameters(float(rng.uniform(1, 5)), 0.1, 1.0)
            sol = solve_setmargin(spec, ds, 2, hp, EXACT)
            lo, hi = spec.effective_bounds()
            assert sol.margin >= 0
            assert (sol.slacks >= 0).all()
            for i in range(2):
                assert is_feasible(spec, sol.configs[i])
                assert (sol.weights[i] >= lo - 1e-9).all()
                assert (sol.weights[i] <= hi + 1e-9).all()


class TestOracleEquivalence:
    def test_random_instances_match_exhaustive(self):
        rng = np.random.default_rng(42)
        for trial in range(12):
            spec = random_small_spec(rng)
            feas = enumerate_feasible(spec, 100)
            ds = random_dataset(rng, feas)
            k = int(rng.integers(1, 3))
            hp = Hyperparameters(float(rng.uniform(1, 20)),
                                 float(10 ** rng.uniform(-3, 1)),
                                 float(10 ** rng.uniform(-3, 1)))
            sol = solve_setmargin(spec, ds, k, hp, EXACT)
            best, _ = exhaustive_setmargin(spec, feas, ds, k, hp)
            assert sol.objective == pytest.approx(best, abs=2e-6), \
                f"trial {trial}: milp {sol.objective} vs oracle {best}"

    def test_solution_tuple_value_matches_oracle_lp(self):
        # the returned (w, x) pair replayed through the fixed-tuple LP cannot
        # beat the solver objective
        rng = np.random.default_rng(9)
        spec = random_small_spec(rng)
        feas = enumerate_feasible(spec, 100)
        ds = random_dataset(rng, feas)
        hp = Hyperparameters(2.0, 0.1, 0.5)
        sol = solve_setmargin(spec, ds, 2, hp, EXACT)
        val = tuple_lp(spec, sol.configs, ds, hp)
        assert val == pytest.approx(sol.objective, abs=2e-6)


class TestMonotoneBeta:
    def test_weight_mass_never_grows_with_beta(self):
        spec = gen_synthetic(3)
        user_w = np.zeros(9)
        user_w[0] = user_w[4] = 50.0
        answer = noiseless_user(user_w)
        configs = enumerate_feasible(spec, 100)
        rng = np.random.default_rng(1)
        ds = PreferenceDataset()
        for _ in range(6):
            i, j = rng.choice(len(configs), 2, replace=False)
            a, b = configs[int(i)], configs[int(j)]
            v = answer(a, b)
            if v == "first":
                ds.append(Preference(a, b))
            elif v == "second":
                ds.append(Preference(b, a))
        masses = []
        for beta in (0.001, 0.1, 1.0, 10.0):
            sol = solve_setmargin(spec, ds, 2, Hyperparameters(5, beta, 0.1), EXACT)
            masses.append(float(np.abs(sol.weights).sum()))
        assert all(m1 >= m2 - 1e-6 for m1, m2 in zip(masses, masses[1:]))


class TestRecommend:
    def test_empty_dataset_maximizes_upper_bound_utility(self):
        spec = ProblemSpec([Attribute("a", 2), Attribute("b", 2)],
                           bounds=WeightBounds([0, 0, 0, 0], [3, 1, 2, 5]))
        w, x = recommend(spec, PreferenceDataset(), Hyperparameters(1, 0, 1), EXACT)
        assert np.allclose(w, spec.bounds.upper, atol=1e-6)
        best = max(utility(spec.bounds.upper, c) for c in enumerate_feasible(spec, 10))
        assert utility(spec.bounds.upper, x) == pytest.approx(best, abs=1e-6)

    def test_single_preference_recovers_direction(self):
        spec, ds = tiny_instance()
        w, x = recommend(spec, ds, Hyperparameters(1, 0, 0), EXACT)
        assert w == pytest.approx([1.0, 0.0], abs=1e-6)

    def test_alpha_below_one_rejected(self):
        spec, ds = tiny_instance()
        with pytest.raises(UnboundedRisk):
            recommend(spec, ds, Hyperparameters(0.9, 0, 0), EXACT)

    def test_noise_free_users_reach_zero_loss(self):
        # consistent answers on the r=3 space: after 30 queries the k=1
        # recommendation should be an exact argmax almost always
        from setmargin.loop import LoopConfig, run
        from setmargin.users import sample_utility, UtilityDistribution
        spec = gen_synthetic(3)
        configs = enumerate_feasible(spec, 100)
        hits = 0
        runs = 20
        for s in range(runs):
            true_w = sample_utility(UtilityDistribution("uniform"), 9, seed=1000 + s)
            cfg = LoopConfig(k=2, T=30, cv_every=1000,
                             initial_hp=Hyperparameters(10.0, 0.001, 1.0))
            trace = run(spec, noiseless_user(true_w), cfg, SolverConfig())
            _, rec = trace.recommendation
            best = max(utility(true_w, c) for c in configs)
            if utility(true_w, rec) >= best - 1e-9:
                hits += 1
        assert hits >= 0.9 * runs


class TestExportDebug:
    def test_round_trip_objective(self):
        spec, ds = tiny_instance()
        sm = build_model(spec, ds, 1, Hyperparameters(1, 0, 0))
        text = export_debug(sm)
        back = solver.read_lp(text)
        r1 = solver.DEFAULT_BACKEND.solve(sm.model, EXACT)
        r2 = solver.DEFAULT_BACKEND.solve(back, EXACT)
        assert r2.objective == pytest.approx(r1.objective, abs=1e-6)

    def test_line_census(self):
        spec, ds = tiny_instance()
        k = 2
        sm = build_model(spec, ds, k, Hyperparameters(1, 0, 1))
        lines = export_debug(sm).splitlines()
        assert sum(1 for ln in lines if ln.strip() == "Maximize") == 1
        rows = [ln for ln in lines if re.match(r" \w+:", ln) and "obj:" not in ln]
        n, m = len(ds), spec.m
        expected = (k * n                      # ranking rows
                    + k * (k - 1)              # diversity rows
                    + 2 * k * m                # diagonal product caps
                    + k * (k - 1) * m          # off-diagonal product floors
                    + k * spec.n_attributes    # one-hot rows
                    + 0)                       # no extra feasibility rows here
        assert len(rows) == expected

    def test_minimal_model_is_objective_and_bounds(self):
        spec = binary_pair_spec()
        sm = build_model(spec, PreferenceDataset(), 1, Hyperparameters(1, 0, 0))
        text = export_debug(sm)
        # no ranking rows, no diversity rows for k=1
        assert "pref_" not in text and "div_" not in text
