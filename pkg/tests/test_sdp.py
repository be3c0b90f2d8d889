import math

import numpy as np
import pytest

from helpers import random_class
from oracleid.bitstrings import (
    BitString,
    ConceptClass,
    FunctionTable,
    generate_class,
    gram_of_function,
)
from oracleid.identify import identify_all
from oracleid.sdp import (
    SdpSolution,
    boolean_and_solution,
    boolean_or_solution,
    cost_of,
    find_first_one_solution,
    first_disagreement_table,
    oracle_id_pipeline,
    oracle_id_solution,
    output_conditioned_compose,
    sum_compose,
    tensor_compose,
    verify_feasible,
)


def bs(text):
    return BitString.from_str(text)


def rank_target(n, sigma=None, s=None, width=None, domain=None):
    """J - F for the first-disagreement function on the given domain."""
    members = tuple(domain) if domain is not None else tuple(
        BitString(n, v) for v in range(1 << n)
    )
    cls = ConceptClass(n, members)
    table = first_disagreement_table(
        cls,
        tuple(sigma) if sigma is not None else tuple(range(n)),
        s if s is not None else BitString.zeros(n),
        n if width is None else width,
    )
    F = gram_of_function(table).entries
    return np.ones_like(F) - F


class TestVerifyFeasible:
    def test_zero_solution_for_zero_matrix(self):
        domain = tuple(BitString(2, v) for v in range(4))
        sol = SdpSolution(domain, np.zeros((4, 2, 1)), np.zeros((4, 2, 1)))
        assert verify_feasible(np.zeros((4, 4)), sol) == 0.0

    def test_explicit_solution_is_feasible(self):
        sol = find_first_one_solution(4)
        assert verify_feasible(rank_target(4), sol) < 1e-12

    def test_doubled_hit_weight_breaks_one_constraint(self):
        sol = find_first_one_solution(4)
        u = sol.u.copy()
        idx = sol.index(bs("1000"))  # first disagreement at rank 1
        u[idx, 0, 0] *= 2.0
        broken = SdpSolution(sol.domain, u, u)
        assert verify_feasible(rank_target(4), broken) == pytest.approx(1.0)

    def test_pair_sampling_matches_full_check(self):
        sol = find_first_one_solution(5)
        target = rank_target(5)
        rng = np.random.default_rng(0)
        pairs = rng.integers(0, 32, size=(200, 2))
        assert verify_feasible(target, sol, pairs=pairs) <= verify_feasible(target, sol) + 1e-15

    def test_dimension_mismatch_rejected(self):
        sol = find_first_one_solution(3)
        with pytest.raises(ValueError):
            verify_feasible(np.zeros((4, 4)), sol)


class TestCostFunction:
    def test_zero_vectors_cost_zero(self):
        domain = tuple(BitString(2, v) for v in range(4))
        sol = SdpSolution(domain, np.zeros((4, 2, 1)), np.zeros((4, 2, 1)))
        assert cost_of(sol).max_value == 0.0

    def test_immediate_hit_costs_one(self):
        cost = cost_of(find_first_one_solution(4))
        assert cost(bs("1000")) == pytest.approx(1.0)
        assert cost(bs("1111")) == pytest.approx(1.0)

    def test_agreeing_input_carries_the_full_ramp(self):
        cost = cost_of(find_first_one_solution(4))
        assert cost(bs("0000")) == pytest.approx(sum(k**-0.5 for k in range(1, 5)))
        assert cost(bs("0000")) == pytest.approx(2.784457050376173)


class TestFirstOneSolution:
    def test_explicit_weights(self):
        sol = find_first_one_solution(4)
        x = sol.index(bs("0010"))  # first one at rank 3
        column = sol.u[x, :, 0]
        assert column[0] == pytest.approx(1.0)  # 1^(-1/4)
        assert column[1] == pytest.approx(2.0**-0.25)
        assert column[2] == pytest.approx(3.0**0.25)  # the hit
        assert column[3] == 0.0

    def test_hit_pairs_meet_exactly_once(self):
        sol = find_first_one_solution(4)
        a = sol.index(bs("1000"))
        b = sol.index(bs("0100"))
        total = sum(
            sol.u[a, j, 0] * sol.v[b, j, 0]
            for j in range(4)
            if bs("1000").bit(j) != bs("0100").bit(j)
        )
        assert total == pytest.approx(1.0)

    def test_equal_rank_pairs_contribute_nothing(self):
        sol = find_first_one_solution(4)
        a = sol.index(bs("1010"))
        b = sol.index(bs("1100"))  # both rank 1
        total = sum(
            sol.u[a, j, 0] * sol.v[b, j, 0]
            for j in range(4)
            if bs("1010").bit(j) != bs("1100").bit(j)
        )
        assert total == 0.0

    def test_scan_order_and_reference_variants(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            n = int(rng.integers(2, 7))
            sigma = tuple(int(v) for v in rng.permutation(n))
            s = BitString(n, int(rng.integers(0, 1 << n)))
            sol = find_first_one_solution(n, sigma, s)
            assert verify_feasible(rank_target(n, sigma, s), sol) < 1e-12

    def test_cost_bounded_by_three_sqrt(self):
        # check the bound over every reachable rank value up to width 64
        # using one representative input per rank
        n = 64
        reps = [BitString(n, 1 << (n - 1 - p)) for p in range(n)] + [BitString.zeros(n)]
        sol = find_first_one_solution(n, domain=tuple(sorted(reps)))
        cost = cost_of(sol)
        for x in sol.domain:
            rank = next((j + 1 for j in range(n) if x.bit(j)), n + 1)
            assert cost(x) <= 3.0 * math.sqrt(rank)

    def test_restricted_width_and_domain(self):
        cls = generate_class("hamming1", 3)
        sigma = (0, 1, 2)
        s = bs("010")
        sol = find_first_one_solution(3, sigma, s, domain=cls.members, width=2)
        target = rank_target(3, sigma, s, width=2, domain=cls.members)
        assert verify_feasible(target, sol) < 1e-12


class TestSumCompose:
    def test_zero_padding_keeps_cost(self):
        sol = find_first_one_solution(3)
        zero = SdpSolution(sol.domain, np.zeros((8, 3, 1)), np.zeros((8, 3, 1)))
        both = sum_compose(sol, zero)
        assert verify_feasible(rank_target(3), both) < 1e-12
        np.testing.assert_allclose(cost_of(both).values, cost_of(sol).values)

    def test_doubling_doubles_target_and_cost(self):
        sol = find_first_one_solution(3)
        double = sum_compose(sol, sol)
        assert verify_feasible(2.0 * rank_target(3), double) < 1e-12
        np.testing.assert_allclose(
            cost_of(double).values, 2.0 * cost_of(sol).values, atol=1e-14
        )

    def test_cost_subadditivity_is_exact(self):
        rng = np.random.default_rng(2)
        domain = tuple(BitString(3, v) for v in range(8))
        for _ in range(20):
            a = SdpSolution(domain, rng.standard_normal((8, 3, 2)), rng.standard_normal((8, 3, 2)))
            b = SdpSolution(domain, rng.standard_normal((8, 3, 3)), rng.standard_normal((8, 3, 3)))
            lhs = cost_of(sum_compose(a, b)).values
            rhs = cost_of(a).values + cost_of(b).values
            assert np.all(lhs <= rhs + 1e-12)

    def test_violations_add_at_most(self):
        rng = np.random.default_rng(3)
        domain = tuple(BitString(3, v) for v in range(8))
        a = SdpSolution(domain, rng.standard_normal((8, 3, 2)), rng.standard_normal((8, 3, 2)))
        b = SdpSolution(domain, rng.standard_normal((8, 3, 2)), rng.standard_normal((8, 3, 2)))
        ta = rng.standard_normal((8, 8))
        ta = ta + ta.T
        tb = rng.standard_normal((8, 8))
        tb = tb + tb.T
        va = verify_feasible(ta, a)
        vb = verify_feasible(tb, b)
        assert verify_feasible(ta + tb, sum_compose(a, b)) <= va + vb + 1e-12

    def test_domain_mismatch_rejected(self):
        with pytest.raises(ValueError):
            sum_compose(find_first_one_solution(3), find_first_one_solution(4))


class TestOutputConditionedCompose:
    def test_constant_function_is_a_single_block(self):
        cls = generate_class("cube", 2)
        f = FunctionTable(cls, (0, 0, 0, 0))
        block = find_first_one_solution(2, domain=cls.members)
        composed = output_conditioned_compose(f, {0: block})
        # F = J here, so the target is J - G
        assert verify_feasible(rank_target(2), composed) < 1e-12
        np.testing.assert_allclose(cost_of(composed).values, cost_of(block).values)

    def test_cross_label_pairs_vanish(self):
        cls = generate_class("cube", 2)
        f = FunctionTable(cls, (0, 0, 1, 1))  # split on the first bit
        blocks = {
            label: find_first_one_solution(2, domain=f.preimage(label))
            for label in (0, 1)
        }
        composed = output_conditioned_compose(f, blocks)
        i = composed.domain.index(bs("00"))
        j = composed.domain.index(bs("10"))
        total = sum(
            composed.u[i, t, :] @ composed.v[j, t, :]
            for t in range(2)
            if bs("00").bit(t) != bs("10").bit(t)
        )
        assert total == 0.0

    def test_cost_equals_own_block_cost_exactly(self):
        cls = generate_class("hamming1", 3)
        order = (0, 1, 2)
        s = bs("010")
        table = first_disagreement_table(cls, order, s, 2)
        blocks = {}
        for label in table.labels:
            members = table.preimage(label)
            blocks[label] = find_first_one_solution(3, domain=members)
        composed = output_conditioned_compose(table, blocks)
        for x in cls.members:
            own = cost_of(blocks[table(x)])(x)
            assert cost_of(composed)(x) == own

    def test_missing_block_rejected(self):
        cls = generate_class("cube", 2)
        f = FunctionTable(cls, (0, 0, 1, 1))
        with pytest.raises(ValueError, match="missing block"):
            output_conditioned_compose(
                f, {0: find_first_one_solution(2, domain=f.preimage(0))}
            )


class TestTensorCompose:
    def test_one_bit_identity_inner_keeps_outer(self):
        outer, _ = boolean_or_solution(2)
        one_bit = ConceptClass.from_values(1, (0, 1))
        inner_sol = SdpSolution(one_bit.members, np.ones((2, 1, 1)), np.ones((2, 1, 1)))
        inner_tab = FunctionTable(one_bit, (0, 1))
        composed = tensor_compose(outer, [(inner_sol, inner_tab)] * 2)
        # inner gram is the identity, so the composite target equals the
        # outer target on relabeled inputs
        or_outputs = tuple(int(x.value != 0) for x in composed.domain)
        F = gram_of_function(
            FunctionTable(ConceptClass(2, composed.domain), or_outputs)
        ).entries
        assert verify_feasible(np.ones_like(F) - F, composed) < 1e-12
        np.testing.assert_allclose(
            cost_of(composed).values, cost_of(outer).values, atol=1e-14
        )

    def test_or_of_ands_all_sixteen_inputs(self):
        or_sol, _ = boolean_or_solution(2)
        and_sol, and_tab = boolean_and_solution(2)
        composed = tensor_compose(or_sol, [(and_sol, and_tab)] * 2)
        outputs = tuple(
            int((x.bit(0) and x.bit(1)) or (x.bit(2) and x.bit(3)))
            for x in composed.domain
        )
        F = gram_of_function(
            FunctionTable(ConceptClass(4, composed.domain), outputs)
        ).entries
        assert verify_feasible(np.ones_like(F) - F, composed) < 1e-10

    def test_cost_bounded_by_product(self):
        or_sol, _ = boolean_or_solution(2)
        and_sol, and_tab = boolean_and_solution(2)
        composed = tensor_compose(or_sol, [(and_sol, and_tab)] * 2)
        outer_cost = cost_of(or_sol)
        inner_cost = cost_of(and_sol)
        comp_cost = cost_of(composed)
        for x in composed.domain:
            left = BitString.from_bits(x.bits[:2])
            right = BitString.from_bits(x.bits[2:])
            z = BitString.from_bits([and_tab(left), and_tab(right)])
            bound = outer_cost(z) * max(inner_cost(left), inner_cost(right))
            assert comp_cost(x) <= bound + 1e-12

    def test_mixed_inner_dimensions(self):
        # one inner instance widened with a zero block: padding must keep
        # every instance's coordinates on the same stride
        or_sol, _ = boolean_or_solution(2)
        and_sol, and_tab = boolean_and_solution(2)
        wide = SdpSolution(
            and_sol.domain,
            np.concatenate([and_sol.u, np.zeros_like(and_sol.u)], axis=2),
            np.concatenate([and_sol.v, np.zeros_like(and_sol.v)], axis=2),
        )
        composed = tensor_compose(or_sol, [(wide, and_tab), (and_sol, and_tab)])
        outputs = tuple(
            int((x.bit(0) and x.bit(1)) or (x.bit(2) and x.bit(3)))
            for x in composed.domain
        )
        F = gram_of_function(
            FunctionTable(ConceptClass(4, composed.domain), outputs)
        ).entries
        assert verify_feasible(np.ones_like(F) - F, composed) < 1e-10

    def test_arity_mismatch_rejected(self):
        or_sol, _ = boolean_or_solution(2)
        and_sol, and_tab = boolean_and_solution(2)
        with pytest.raises(ValueError):
            tensor_compose(or_sol, [(and_sol, and_tab)] * 3)


class TestOracleIdPipeline:
    def identity_target(self, m):
        return np.ones((m, m)) - np.eye(m)

    def test_weight_one_class(self):
        cls = generate_class("hamming1", 3)
        pipe = oracle_id_pipeline(cls)
        assert verify_feasible(self.identity_target(3), pipe.solution) < 1e-10
        assert pipe.cost(bs("100")) <= 3 * (1 + math.sqrt(3))

    def test_two_cube(self):
        cls = generate_class("cube", 2)
        sol, cost = oracle_id_solution(cls)
        assert verify_feasible(self.identity_target(4), sol) < 1e-10
        assert cost.max_value <= 3 * 2.8284271247461903  # 3 * optimum for (4, 2)

    def test_pair_class_single_stage(self):
        cls = ConceptClass.from_strings(["0010", "1001"])
        pipe = oracle_id_pipeline(cls)
        assert len(pipe.stage_solutions) == 1
        assert verify_feasible(self.identity_target(2), pipe.solution) < 1e-10
        assert pipe.cost.max_value <= 3.0  # first disagreement at rank 1

    def test_stage_targets_each_feasible(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            cls = random_class(rng, 4, int(rng.integers(2, 12)))
            pipe = oracle_id_pipeline(cls)
            for sol, target in zip(pipe.stage_solutions, pipe.stage_targets):
                assert verify_feasible(target, sol) < 1e-10

    def test_stage_targets_telescope_to_identity(self):
        rng = np.random.default_rng(5)
        cls = random_class(rng, 4, 9)
        pipe = oracle_id_pipeline(cls)
        total = sum(pipe.stage_targets)
        np.testing.assert_allclose(total, self.identity_target(cls.size), atol=0)

    def test_cost_tracks_traces_within_three(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            cls = random_class(rng, 4, int(rng.integers(2, 12)))
            pipe = oracle_id_pipeline(cls)
            traces = identify_all(cls)
            for x in cls.members:
                trace = traces[x]
                budget = sum(math.sqrt(p) for p in trace.positions) + math.sqrt(cls.n)
                assert pipe.cost(x) <= 3.0 * budget

    def test_chained_cost_bounded_by_stage_maxima(self):
        rng = np.random.default_rng(7)
        cls = random_class(rng, 5, 14)
        pipe = oracle_id_pipeline(cls)
        stage_max = sum(cost_of(sol).max_value for sol in pipe.stage_solutions)
        assert pipe.cost.max_value <= stage_max + 1e-12

    def test_singleton_class(self):
        cls = ConceptClass.from_strings(["0101"])
        sol, cost = oracle_id_solution(cls)
        assert verify_feasible(np.zeros((1, 1)), sol) == 0.0
        assert cost.max_value == 0.0

    def test_stage_structure_matches_trace_paths(self):
        rng = np.random.default_rng(8)
        cls = random_class(rng, 4, 10)
        pipe = oracle_id_pipeline(cls)
        traces = identify_all(cls)
        final = pipe.stage_tables[-1]
        for x in cls.members:
            path = final(x)
            expected = traces[x].positions + (0,) * (len(path) - len(traces[x].positions))
            assert path == expected
