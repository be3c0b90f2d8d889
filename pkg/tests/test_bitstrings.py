import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import subsets_of_cube
from oracleid.bitstrings import (
    BitString,
    ConceptClass,
    FunctionTable,
    filter_by_disagreement,
    generate_class,
    gram_of_function,
    majority_string,
)


def bs(text):
    return BitString.from_str(text)


class TestBitString:
    def test_round_trip(self):
        for text in ["0", "1", "0110", "00001"]:
            assert str(bs(text)) == text

    def test_bit_indexing_msb_first(self):
        x = bs("0110")
        assert x.bits == (0, 1, 1, 0)
        assert x.bit(1) == 1 and x.bit(3) == 0

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            bs("01a")
        with pytest.raises(ValueError):
            BitString(0, 0)
        with pytest.raises(ValueError):
            BitString(2, 4)

    def test_lexicographic_order_matches_numeric(self):
        xs = [bs("10"), bs("01"), bs("11"), bs("00")]
        assert [str(x) for x in sorted(xs)] == ["00", "01", "10", "11"]


class TestMajority:
    def test_tie_forced_to_one(self):
        assert majority_string([bs("0"), bs("1")]) == bs("1")

    def test_hand_enumerated(self):
        assert majority_string([bs("00"), bs("01"), bs("11")]) == bs("01")

    def test_singleton(self):
        assert majority_string([bs("0110")]) == bs("0110")

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty set"):
            majority_string([])

    def test_result_may_leave_the_set(self):
        members = [bs("110"), bs("101"), bs("011")]
        assert majority_string(members) == bs("111")

    @given(st.lists(st.integers(0, 15), min_size=1, max_size=16, unique=True))
    def test_minority_never_exceeds_half(self, values):
        members = [BitString(4, v) for v in values]
        maj = majority_string(members)
        for i in range(4):
            disagree = sum(1 for y in members if y.bit(i) != maj.bit(i))
            assert 2 * disagree <= len(members)

    def test_minority_bound_exhaustive_n3(self):
        for subset in subsets_of_cube(3):
            maj = majority_string(subset)
            for i in range(3):
                disagree = sum(1 for y in subset if y.bit(i) != maj.bit(i))
                assert 2 * disagree <= len(subset)


class TestFilterByDisagreement:
    S = (bs("100"), bs("010"), bs("001"))

    def test_found_keeps_prefix_agreers_that_flip(self):
        got = filter_by_disagreement(self.S, (0, 1, 2), bs("010"), 1, True)
        assert got == (bs("100"),)

    def test_not_found_keeps_full_agreement_only(self):
        got = filter_by_disagreement(self.S, (0, 1, 2), bs("010"), None, False)
        assert got == (bs("010"),)

    def test_found_on_full_cube(self):
        cube = generate_class("cube", 2)
        got = filter_by_disagreement(cube.members, (0, 1), bs("11"), 2, True)
        assert got == (bs("10"),)

    def test_found_and_not_found_are_disjoint(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            values = rng.choice(16, size=int(rng.integers(1, 9)), replace=False)
            members = tuple(BitString(4, int(v)) for v in values)
            sigma = tuple(rng.permutation(4))
            s = BitString(4, int(rng.integers(0, 16)))
            missing = set(filter_by_disagreement(members, sigma, s, None, False))
            for p in range(1, 5):
                found = set(filter_by_disagreement(members, sigma, s, p, True))
                assert not (found & missing)
                assert s not in found

    def test_rank_out_of_range(self):
        with pytest.raises(ValueError):
            filter_by_disagreement(self.S, (0, 1, 2), bs("010"), 4, True)


class TestGram:
    def test_identity_function_gives_identity_matrix(self):
        cls = generate_class("cube", 2)
        f = FunctionTable(cls, tuple(str(m) for m in cls.members))
        gram = gram_of_function(f)
        assert np.array_equal(gram.entries, np.eye(4))

    def test_constant_function_gives_all_ones(self):
        cls = generate_class("cube", 2)
        f = FunctionTable(cls, (7, 7, 7, 7))
        assert np.array_equal(gram_of_function(f).entries, np.ones((4, 4)))

    def test_equal_outputs_give_ones_block(self):
        cls = ConceptClass.from_strings(["10", "11"])
        f = FunctionTable(cls, (1, 1))  # both have a 1 in first position
        assert np.array_equal(gram_of_function(f).entries, np.ones((2, 2)))

    def test_symmetric_unit_diagonal_binary(self):
        rng = np.random.default_rng(11)
        cls = generate_class("random", 5, size=10, seed=3)
        f = FunctionTable(cls, tuple(int(v) for v in rng.integers(0, 3, size=10)))
        g = gram_of_function(f).entries
        assert np.array_equal(g, g.T)
        assert np.array_equal(np.diag(g), np.ones(10))
        assert set(np.unique(g)) <= {0.0, 1.0}


class TestGenerateClass:
    def test_cube(self):
        cls = generate_class("cube", 2)
        assert [str(m) for m in cls.members] == ["00", "01", "10", "11"]

    def test_hamming1(self):
        cls = generate_class("hamming1", 3)
        assert {str(m) for m in cls.members} == {"100", "010", "001"}

    def test_prefix(self):
        cls = generate_class("prefix", 4, free_bits=2)
        assert {str(m) for m in cls.members} == {"0000", "0100", "1000", "1100"}

    def test_hamming_pair_weights(self):
        cls = generate_class("hamming-pair", 5, k=2)
        assert {m.weight() for m in cls.members} == {1, 2}
        assert cls.size == 5 + 10

    def test_random_deterministic_and_distinct(self):
        a = generate_class("random", 8, size=20, seed=7)
        b = generate_class("random", 8, size=20, seed=7)
        assert a == b
        assert len(set(a.values)) == 20

    def test_infeasible_size(self):
        with pytest.raises(ValueError):
            generate_class("random", 3, size=9, seed=0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            generate_class("mystery", 3)


class TestConceptClassSerialization:
    def test_json_round_trip(self):
        cls = generate_class("random", 6, size=9, seed=1)
        again = ConceptClass.from_json(cls.to_json())
        assert again == cls

    def test_json_shape(self):
        payload = json.loads(generate_class("hamming1", 3).to_json())
        assert payload == {"n": 3, "members": ["001", "010", "100"]}

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            ConceptClass.from_strings(["01", "01"])

    def test_members_canonically_sorted(self):
        cls = ConceptClass.from_strings(["11", "00", "10"])
        assert [str(m) for m in cls.members] == ["00", "10", "11"]
