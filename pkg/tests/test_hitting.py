import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from derand_lab.errors import ConfigError, FamilyTooLarge, IndexOutOfRange, RetriesExhausted
from derand_lab.hitting import (
    HittingInstance,
    build_hitting_set,
    decode_element,
    encode_element,
    four_part_description,
    index_bits,
    mean_miss_measure,
    miss_measure,
    prefix_code,
    prefix_len,
    read_prefix_code,
)

UNIVERSE = tuple("abcdefgh")


def eight_uniform():
    return HittingInstance.all_subsets(UNIVERSE, np.full(8, 1 / 8), 0.25, 2.0)


def brute_miss(members, P, family, Q, gamma):
    S = set(members)
    return sum(q for D, q in zip(family, Q)
               if sum(P[i] for i in D) >= gamma - 1e-12 and not S & set(D))


def test_size_is_ceiling():
    assert eight_uniform().size == 8
    inst = HittingInstance(("a", "b"), np.array([0.5, 0.5]), 0.3, 1.0,
                           (frozenset({0}),), np.array([1.0]))
    assert inst.size == 4


def test_full_measure_sets_single_draw():
    family = (frozenset(range(4)),)
    inst = HittingInstance(tuple("wxyz"), np.full(4, 0.25), 1.0, 1.0, family, np.array([1.0]))
    hs = build_hitting_set(inst, "5")
    assert len(hs.members) == 1
    assert miss_measure(hs, inst) <= math.exp(-1)


def test_eight_element_example():
    inst = eight_uniform()
    hs = build_hitting_set(inst, "5")
    assert len(hs.members) == 8
    m = miss_measure(hs, inst)
    assert m <= math.exp(-2)
    assert m == pytest.approx(brute_miss(hs.members, inst.P, inst.family, inst.family_Q, 0.25),
                              abs=1e-15)


def test_concentrated_family_gets_hit():
    D = frozenset({2, 5})
    inst = HittingInstance(UNIVERSE, np.full(8, 1 / 8), 0.25, 2.0, (D,), np.array([1.0]))
    hs = build_hitting_set(inst, "5")
    assert set(hs.members) & D


def test_miss_measure_boundaries():
    inst = eight_uniform()
    assert miss_measure(range(8), inst) == 0.0
    heavy = sum(q for D, q in zip(inst.family, inst.family_Q) if len(D) >= 2)
    assert miss_measure((), inst) == pytest.approx(heavy)
    assert heavy == pytest.approx(1.0)


@given(st.lists(st.integers(0, 7), max_size=8))
def test_miss_measure_matches_enumeration(members):
    inst = eight_uniform()
    assert miss_measure(members, inst) == pytest.approx(
        brute_miss(members, inst.P, inst.family, inst.family_Q, 0.25), abs=1e-12)


def test_mean_over_draws_within_bound():
    mean, se = mean_miss_measure(eight_uniform(), 200, "5")
    assert mean <= math.exp(-2) + 3 * se


def test_retries_exhausted():
    # one heavy set, hit by each single draw with probability 1/2
    inst = HittingInstance(("a", "b"), np.array([0.5, 0.5]), 0.5, 0.5,
                           (frozenset({0}),), np.array([1.0]))
    assert inst.size == 1
    seed = next(format(i, "x") for i in range(1, 100)
                if miss_measure(build_hitting_set(inst, format(i, "x"), 1000).members, inst) == 0
                and build_hitting_set(inst, format(i, "x"), 1000).attempts > 1)
    with pytest.raises(RetriesExhausted):
        build_hitting_set(inst, seed, max_retries=1)
    assert build_hitting_set(inst, seed).attempts > 1


def test_family_too_large():
    with pytest.raises(FamilyTooLarge):
        HittingInstance.all_subsets(tuple(str(i) for i in range(21)), np.full(21, 1 / 21), 0.5, 1)


def test_instance_validation():
    with pytest.raises(ConfigError):
        HittingInstance(("a",), np.array([0.5]), 0.5, 1.0, (frozenset({0}),), np.array([1.0]))
    with pytest.raises(ConfigError):
        HittingInstance(("a",), np.array([1.0]), 0.0, 1.0, (frozenset({0}),), np.array([1.0]))
    with pytest.raises(ConfigError):
        HittingInstance(("a",), np.array([1.0]), 0.5, -1.0, (frozenset({0}),), np.array([1.0]))


def test_dict_round_trip():
    inst = eight_uniform()
    again = HittingInstance.from_dict(inst.to_dict())
    assert again.family == inst.family
    np.testing.assert_allclose(again.family_Q, inst.family_Q)


def test_build_reproducible():
    assert build_hitting_set(eight_uniform(), "7") == build_hitting_set(eight_uniform(), "7")


# ---------------------------------------------------------------- descriptions

@given(st.integers(0, 10**6))
def test_prefix_code_length_and_decoding(v):
    code = prefix_code(v)
    L = math.ceil(math.log2(v + 2))
    assert len(code) == prefix_len(v) == L + 2 * math.ceil(math.log2(L + 1))
    assert read_prefix_code(code + "0110") == (v, len(code))


def test_prefix_codes_are_prefix_free():
    codes = [prefix_code(v) for v in range(300)]
    for a, b in itertools.permutations(codes, 2):
        assert not b.startswith(a)


def test_singleton_index_part_empty():
    assert index_bits(1, 0) == 0
    assert four_part_description([3], 0, 0, 1, 0) == 2 * prefix_len(0)


def test_index_part_twelve_bits():
    assert index_bits(256, 4) == 12
    total = four_part_description(list(range(4096)), 5, 10, 256, 4)
    assert total == 10 + prefix_len(8) + prefix_len(4) + 12


@given(st.floats(0.5, 5000), st.integers(0, 12))
def test_index_part_is_ceil_log_size(beta, s):
    size = math.ceil(round(beta * 2**s, 9))
    assert index_bits(beta, s) == (math.ceil(math.log2(size)) if size > 1 else 0)


def test_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        four_part_description([1, 2, 3], 3, 0, 3, 0)
    with pytest.raises(IndexOutOfRange):
        encode_element([1, 2, 3], -1, 0, 3, 0)


def test_round_trip_twelve_elements():
    members = tuple(range(100, 112))

    def search(q_id, log_beta, s):
        assert (q_id, log_beta, s) == (9, 4, 0)
        return members

    for i in range(12):
        bits = encode_element(members, i, 9, 12, 0)
        assert decode_element(bits, search) == members[i]
    assert decode_element(encode_element(members, 5, 9, 12, 0), search) == members[5]


def test_round_trip_hitting_set_all_indices():
    inst = eight_uniform()
    hs = build_hitting_set(inst, "5")
    s = 2  # gamma = 2^-2
    for i in range(len(hs.members)):
        bits = encode_element(hs, i, 0, inst.beta, s)
        assert decode_element(bits, lambda *_: build_hitting_set(inst, "5")) == hs.members[i]
        assert len(bits) == four_part_description(hs, i, prefix_len(0), inst.beta, s)


def test_encode_rejects_inconsistent_index_width():
    with pytest.raises(ConfigError):
        encode_element(list(range(5)), 0, 0, 12, 0)
