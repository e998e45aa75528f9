import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from derand_lab.errors import (
    ConfigError,
    DegreeTooSmall,
    DimensionMismatch,
    InfeasibleOccurrenceBound,
    LengthMismatch,
)
from derand_lab.lll import dependency_degree, resample_solve
from derand_lab.problems import (
    BoundedKSatFormula,
    failure_rate,
    gen_binary_matrix,
    gen_bounded_ksat,
    ksat_system,
    occurrence_cap,
    satisfaction_rate,
    success_probability_bounds,
    threshold,
    verify_balancing,
    verify_ksat,
)
from derand_lab.problems.balancing import (
    balancing_system,
    bits_from_signs,
    chernoff_row_bound,
    discrepancy,
    signs_from_bits,
)
from derand_lab.streams import make_rng


# ---------------------------------------------------------------- balancing

def test_small_n_always_balanced():
    rng = make_rng("5", "small")
    assert threshold(4) == pytest.approx(9.42, abs=0.01)
    for _ in range(50):
        m = rng.integers(0, 2, (4, 4))
        b = rng.choice([-1, 1], 4)
        assert verify_balancing(m, b)


def test_alternating_signs_cancel():
    b = np.tile([1, -1], 64)
    assert verify_balancing(np.ones((128, 128), dtype=int), b)


def test_all_plus_fails():
    assert threshold(128) == pytest.approx(99.68, abs=0.01)
    assert not verify_balancing(np.ones((128, 128), dtype=int), np.ones(128, dtype=int))


@given(st.integers(2, 128))
def test_cancelling_construction_any_n(half):
    n = 2 * half
    b = np.tile([1, -1], half)
    assert verify_balancing(np.ones((n, n), dtype=int), b)


@given(st.integers(4, 256))
def test_cancelling_construction_odd_and_even(n):
    b = np.array([(-1) ** i for i in range(n)])
    assert discrepancy(np.ones((n, n), dtype=int), b) <= 1
    assert verify_balancing(np.ones((n, n), dtype=int), b)


def test_threshold_tie_accepted():
    # n = 1: threshold 0, an all-zero matrix has discrepancy 0 = threshold
    assert threshold(1) == 0.0
    assert verify_balancing(np.zeros((1, 1), dtype=int), np.array([1]))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        verify_balancing(np.ones((4, 4), dtype=int), np.ones(5, dtype=int))


def test_bad_entries():
    with pytest.raises(ConfigError):
        verify_balancing(np.full((2, 2), 2), np.ones(2, dtype=int))
    with pytest.raises(ConfigError):
        verify_balancing(np.ones((2, 2), dtype=int), np.array([1, 0]))


def test_sign_bit_mapping():
    b = np.array([1, -1, -1, 1])
    assert bits_from_signs(b).tolist() == [1, 0, 0, 1]
    np.testing.assert_array_equal(signs_from_bits(bits_from_signs(b)), b)


def test_failure_rate_vs_chernoff():
    m = gen_binary_matrix(128, make_rng("5", "mat"))
    trials = 20_000
    rate = failure_rate(m, trials, make_rng("5", "fail"))
    bound = 2 * 128.0**-7
    assert rate <= bound + 3 * math.sqrt(bound / trials)


def test_chernoff_row_bound_small():
    assert chernoff_row_bound(128, 128) <= 2 * 128.0**-8 + 1e-30


def test_balancing_solver_output_verifies():
    m = gen_binary_matrix(64, make_rng("5", "bal"))
    system = balancing_system(m)
    sol = resample_solve(system, make_rng("5", "bal-solve"))
    assert verify_balancing(m, signs_from_bits(sol.assignment))


# ---------------------------------------------------------------- k-SAT

@pytest.mark.parametrize("k,cap", [(3, -1), (4, 0), (5, 1), (6, 2), (7, 5), (8, 10)])
def test_occurrence_caps(k, cap):
    assert occurrence_cap(k) == cap


def test_cap_arithmetic():
    assert 128 / (7 * math.e) == pytest.approx(6.727, abs=1e-3)
    assert 256 / (8 * math.e) == pytest.approx(11.77, abs=1e-2)


@pytest.mark.parametrize("k", [3, 4])
def test_small_k_infeasible(k):
    with pytest.raises(InfeasibleOccurrenceBound):
        gen_bounded_ksat(50, k, 5, make_rng("5"))


def test_too_many_clauses():
    with pytest.raises(InfeasibleOccurrenceBound):
        gen_bounded_ksat(10, 8, 20, make_rng("5"))


@pytest.mark.parametrize("n,k,m", [(100, 8, 120), (100, 7, 70), (30, 8, 37), (20, 5, 4)])
def test_generated_formula_invariants(n, k, m):
    f = gen_bounded_ksat(n, k, m, make_rng("5", "ksat", n, k, m))
    assert f.clauses.shape == (m, k)
    for clause in f.clauses:
        assert len(set(np.abs(clause))) == k
    assert f.respects_bound()
    assert f.occurrences().max() <= occurrence_cap(k)


def test_generator_deterministic():
    a = gen_bounded_ksat(100, 8, 120, make_rng("5", "x"))
    b = gen_bounded_ksat(100, 8, 120, make_rng("5", "x"))
    np.testing.assert_array_equal(a.clauses, b.clauses)


def test_empty_formula_satisfied():
    f = BoundedKSatFormula(5, 3, np.zeros((0, 3), dtype=int))
    assert verify_ksat(f, np.zeros(5, dtype=bool))


def test_all_positive_clause_all_false():
    f = BoundedKSatFormula(8, 8, np.arange(1, 9).reshape(1, 8))
    assert not verify_ksat(f, np.zeros(8, dtype=bool))
    a = np.zeros(8, dtype=bool)
    a[3] = True
    assert verify_ksat(f, a)


def test_assignment_length_checked():
    f = BoundedKSatFormula(8, 8, np.arange(1, 9).reshape(1, 8))
    with pytest.raises(LengthMismatch):
        verify_ksat(f, np.zeros(7, dtype=bool))


@given(st.integers(0, 2**20))
def test_verify_matches_clause_loop(seed):
    rng = np.random.default_rng(seed)
    f = gen_bounded_ksat(20, 5, 4, make_rng("5", "loop", seed % 7))
    a = rng.integers(0, 2, 20).astype(bool)
    expected = all(any(a[abs(l) - 1] == (l > 0) for l in clause) for clause in f.clauses)
    assert verify_ksat(f, a) == expected


def test_solver_output_verifies():
    f = gen_bounded_ksat(100, 8, 120, make_rng("5", "solve"))
    sol = resample_solve(ksat_system(f), make_rng("5", "solve-run"))
    assert verify_ksat(f, sol.assignment.astype(bool))


def test_eq4_satisfaction_rate():
    f = gen_bounded_ksat(100, 8, 120, make_rng("5", "eq4"))
    trials = 20_000
    rate = satisfaction_rate(f, trials, make_rng("5", "eq4-run"))
    target = (1 - math.e / 256) ** 120
    assert rate >= target - 3 * math.sqrt(target * (1 - target) / trials)


def test_ksat_dependency_bound():
    f = gen_bounded_ksat(100, 8, 120, make_rng("5", "dep"))
    assert dependency_degree(ksat_system(f)) <= 8 * (occurrence_cap(8) - 1)


def test_duplicate_variable_rejected():
    with pytest.raises(ConfigError):
        BoundedKSatFormula(4, 2, np.array([[1, -1]]))


# ---------------------------------------------------------------- bounds

def test_bound_examples():
    assert success_probability_bounds("cycles", n=100, k=20) == 0.5
    assert success_probability_bounds("ksat", m=400, k=8) == pytest.approx(8.49, abs=0.01)
    assert success_probability_bounds("balance", n=128) == pytest.approx(5.5e-15, rel=0.02)


def test_bound_errors():
    with pytest.raises(DegreeTooSmall):
        success_probability_bounds("cycles", n=10, k=4)
    with pytest.raises(InfeasibleOccurrenceBound):
        success_probability_bounds("ksat", m=10, k=3)
    with pytest.raises(ConfigError):
        success_probability_bounds("sudoku", n=9)
