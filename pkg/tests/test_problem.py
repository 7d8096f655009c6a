import json

import numpy as np
import pytest

from setmargin.problem import (Attribute, Configuration, CostMatrix,
                               InvalidAssignment, LinearConstraint, ProblemSpec,
                               SpaceTooLarge, WeightBounds, count_feasible,
                               decode, dump_problem, encode, enumerate_feasible,
                               horn_clause, is_feasible, load_problem,
                               reduce_real_attributes, utility, GE)
from setmargin.bench import gen_synthetic

from oracles import dfs_feasible_count


def two_binary_spec(constraints=()):
    """Two independent binary choices as two cardinality-2 attributes."""
    return ProblemSpec([Attribute("a", 2), Attribute("b", 2)], constraints,
                       bounds=WeightBounds(np.zeros(4), np.ones(4)))


class TestEncode:
    def test_one_hot_layout(self):
        spec = ProblemSpec([Attribute(f"a{i}", 3) for i in range(3)],
                           bounds=WeightBounds(np.zeros(9), np.full(9, 100.0)))
        cfg = encode(spec, (0, 1, 2))
        assert cfg.bits.tolist() == [1, 0, 0, 0, 1, 0, 0, 0, 1]

    def test_r3_has_9_features(self):
        assert gen_synthetic(3).m == 9

    def test_exclusivity_random(self):
        rng = np.random.default_rng(0)
        spec = ProblemSpec([Attribute("a", 4), Attribute("b", 2), Attribute("c", 3)],
                           bounds=WeightBounds(np.zeros(9), np.ones(9)))
        for _ in range(50):
            assignment = [int(rng.integers(c)) for c in spec.cardinalities]
            cfg = encode(spec, assignment)
            for a in range(spec.n_attributes):
                lo, hi = spec.offsets[a], spec.offsets[a + 1]
                assert int(cfg.bits[lo:hi].sum()) == 1
            assert decode(spec, cfg) == tuple(assignment)

    def test_rejects_out_of_range(self):
        spec = two_binary_spec()
        with pytest.raises(InvalidAssignment):
            encode(spec, (0, 2))
        with pytest.raises(InvalidAssignment):
            encode(spec, (0,))

    def test_derived_reals(self):
        cost = CostMatrix([[4.0, 5.0]], ("price",))
        spec = ProblemSpec([Attribute("a", 2)], cost=cost,
                           bounds=WeightBounds([0, 0], [1, 1], [0.0], [2.0]))
        cfg = encode(spec, (1,))
        assert cfg.reals.tolist() == [5.0]


class TestUtility:
    def test_zero_weights(self):
        spec = two_binary_spec()
        assert utility(np.zeros(4), encode(spec, (1, 0))) == 0.0

    def test_dot_product(self):
        x = Configuration(np.array([1, 0]))
        assert utility(np.array([2.0, 3.0]), x) == 2.0

    def test_real_part(self):
        # w_B=(1,0), w_R=(1), C=[[4,5]], x_B=(0,1): 0 + 1*5 = 5
        x = Configuration(np.array([0, 1]), reals=np.array([5.0]))
        assert utility(np.array([1.0, 0.0, 1.0]), x) == 5.0

    def test_dimension_mismatch(self):
        from setmargin.problem import DimensionError
        with pytest.raises(DimensionError):
            utility(np.ones(3), Configuration(np.array([1, 0])))


class TestReduceRealAttributes:
    def make(self, c_rows, rlo, rhi, blo=(0.0, 0.0), bhi=(0.0, 0.0)):
        cost = CostMatrix(c_rows, ("price",))
        return ProblemSpec([Attribute("a", 2)], cost=cost,
                           bounds=WeightBounds(list(blo), list(bhi), rlo, rhi))

    def test_zero_cost_rows_leave_bounds(self):
        spec = self.make([[0.0, 0.0]], [1.0], [2.0], bhi=(3.0, 4.0))
        red = reduce_real_attributes(spec)
        assert red.bounds.lower.tolist() == [0.0, 0.0]
        assert red.bounds.upper.tolist() == [3.0, 4.0]

    def test_bounds_fold_cost(self):
        # w_B lower (0,0), w_R in [1,2], C=[[4,5]] -> v in [(4,5), (8,10)]
        spec = self.make([[4.0, 5.0]], [1.0], [2.0])
        red = reduce_real_attributes(spec)
        assert red.bounds.lower.tolist() == [4.0, 5.0]
        assert red.bounds.upper.tolist() == [8.0, 10.0]
        assert red.cost is None

    def test_utility_preserved_random(self):
        rng = np.random.default_rng(7)
        cost = CostMatrix(rng.uniform(0, 3, size=(2, 4)), ("p", "q"))
        spec = ProblemSpec(
            [Attribute("a", 2), Attribute("b", 2)], cost=cost,
            bounds=WeightBounds(np.zeros(4), np.full(4, 10.0), np.zeros(2), np.full(2, 5.0)))
        red = reduce_real_attributes(spec)
        for _ in range(100):
            w_b = rng.uniform(0, 10, size=4)
            w_r = rng.uniform(0, 5, size=2)
            assignment = [int(rng.integers(2)), int(rng.integers(2))]
            x = encode(spec, assignment)
            v = w_b + cost.entries.T @ w_r
            full = utility(np.concatenate([w_b, w_r]), x)
            reduced = utility(v, encode(red, assignment))
            assert abs(full - reduced) < 1e-9


class TestEnumerateFeasible:
    def test_synthetic_r3_count(self):
        assert len(enumerate_feasible(gen_synthetic(3), 100)) == 27

    def test_disjunction_counts_assignments(self):
        # "a chosen true or b chosen true" over the value-1 bits
        con = LinearConstraint(((1, 1.0), (3, 1.0)), GE, 1.0)
        spec = two_binary_spec([con])
        assert len(enumerate_feasible(spec, 10)) == 3

    def test_limit_enforced(self):
        with pytest.raises(SpaceTooLarge):
            enumerate_feasible(gen_synthetic(3), 26)

    def test_all_outputs_feasible(self):
        con = LinearConstraint(((1, 1.0), (3, 1.0)), GE, 1.0)
        spec = two_binary_spec([con])
        for cfg in enumerate_feasible(spec, 10):
            assert is_feasible(spec, cfg)

    def test_count_matches_dfs_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            cards = [int(rng.integers(2, 5)) for _ in range(int(rng.integers(1, 4)))]
            attrs = [Attribute(f"a{i}", c) for i, c in enumerate(cards)]
            m = sum(cards)
            cons = []
            if rng.random() < 0.7 and m >= 2:
                z = rng.choice(m, size=2, replace=False)
                cons.append(LinearConstraint(((int(z[0]), 1.0), (int(z[1]), 1.0)), GE, 1.0))
            try:
                spec = ProblemSpec(attrs, cons, bounds=WeightBounds(np.zeros(m), np.ones(m)))
            except Exception:
                continue
            assert count_feasible(spec) == dfs_feasible_count(spec)
            assert len(enumerate_feasible(spec, 10 ** 5)) == count_feasible(spec)


class TestHornClause:
    def test_single_antecedent(self):
        con = horn_clause([0], [2, 3])
        spec = ProblemSpec([Attribute("a", 2), Attribute("b", 2)], [con],
                           bounds=WeightBounds(np.zeros(4), np.ones(4)))
        # antecedent false: anything goes; antecedent true: b must be value 1?
        # features: a=0 ->0, a=1 ->1, b=0 ->2, b=1 ->3; clause: a=0 -> (b=0 or b=1)
        assert count_feasible(spec) == 4

    def test_real_restriction(self):
        con = horn_clause([1], [2])  # a=1 -> b=0
        spec = ProblemSpec([Attribute("a", 2), Attribute("b", 2)], [con],
                           bounds=WeightBounds(np.zeros(4), np.ones(4)))
        feas = {decode(spec, c) for c in enumerate_feasible(spec, 10)}
        assert feas == {(0, 0), (0, 1), (1, 0)}


class TestProblemFiles:
    def spec(self):
        cost = CostMatrix([[1.0, 2.0, 0.5, 0.0]], ("price",))
        return ProblemSpec(
            [Attribute("a", 2, ("x", "y")), Attribute("b", 2)],
            [LinearConstraint(((1, 1.0), (3, 1.0)), GE, 1.0)],
            cost,
            WeightBounds(np.zeros(4), np.full(4, 10.0), [0.0], [1.0]),
            name="roundtrip")

    def test_round_trip(self):
        spec = self.spec()
        data = dump_problem(spec)
        back = load_problem(json.dumps(data))
        assert back.m == spec.m
        assert back.name == spec.name
        assert [a.name for a in back.attributes] == ["a", "b"]
        assert back.constraints == spec.constraints
        assert np.allclose(back.cost.entries, spec.cost.entries)
        assert np.allclose(back.bounds.upper, spec.bounds.upper)

    def test_rejects_unknown_fields(self):
        data = dump_problem(self.spec())
        data["surprise"] = 1
        with pytest.raises(ValueError, match="unknown field"):
            load_problem(data)

    def test_rejects_unknown_nested_field(self):
        data = dump_problem(self.spec())
        data["attributes"][0]["color"] = "red"
        with pytest.raises(ValueError, match="unknown field"):
            load_problem(data)

    def test_infeasible_spec_rejected(self):
        from setmargin.problem import InfeasibleSpec, LE
        con = LinearConstraint(((0, 1.0), (1, 1.0)), LE, 0.0)  # kills one-hot
        with pytest.raises(InfeasibleSpec):
            ProblemSpec([Attribute("a", 2)], [con],
                        bounds=WeightBounds(np.zeros(2), np.ones(2)))


class TestValidation:
    def test_bounds_must_match_m(self):
        from setmargin.problem import DimensionError
        with pytest.raises(DimensionError):
            ProblemSpec([Attribute("a", 2)], bounds=WeightBounds(np.zeros(3), np.ones(3)))

    def test_bad_bounds(self):
        with pytest.raises(ValueError):
            WeightBounds(np.array([1.0]), np.array([0.5]))
        with pytest.raises(ValueError):
            WeightBounds(np.array([-1.0]), np.array([0.5]))

    def test_negative_cost_rejected(self):
        with pytest.raises(ValueError):
            CostMatrix([[-1.0, 0.0]])

    def test_duplicate_attribute_names(self):
        with pytest.raises(ValueError):
            ProblemSpec([Attribute("a", 2), Attribute("a", 2)],
                        bounds=WeightBounds(np.zeros(4), np.ones(4)))
