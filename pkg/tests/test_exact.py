import numpy as np
import pytest

from bulgarian.exact import (
    DistributionVector,
    enumerate_partitions,
    is_aperiodic_by_loops,
    is_irreducible,
    power_iteration,
    stationary_exact,
    stationary_residual,
    total_variation,
    transition_matrix,
    transition_probability,
)
from bulgarian.partitions import Partition

from oracles import card_level_row, partition_count

# stationary law for n = 6, p = 0.3 in reverse-lexicographic order; frozen from
# the linear solve and checked below against power iteration and against the
# card-level oracle matrix
PI_6_03 = [
    0.0008262018176441194,
    0.012568302057967088,
    0.015822759642285997,
    0.06883216194257898,
    0.00862670391025546,
    0.14482656562351845,
    0.17901109150313776,
    0.022573051634657514,
    0.2469399608063581,
    0.2555316495518954,
    0.04444155150970115,
]


def oracle_matrix(n, p):
    index = enumerate_partitions(n)
    T = np.zeros((len(index), len(index)))
    for i, lam in enumerate(index):
        for mu, pr in card_level_row(lam.parts, p).items():
            T[i, index.index_of(mu)] += pr
    return T


def test_order_and_counts():
    assert [lam.parts for lam in enumerate_partitions(3)] == [(3,), (2, 1), (1, 1, 1)]
    assert len(enumerate_partitions(2)) == 2
    assert len(enumerate_partitions(4)) == 5
    assert len(enumerate_partitions(10)) == 42
    for n in range(1, 15):
        assert len(enumerate_partitions(n)) == partition_count(n)
    with pytest.raises(ValueError):
        enumerate_partitions(15)
    assert len(enumerate_partitions(15, cap=15)) == 176


def test_hand_transitions_n2():
    p = 0.3
    assert transition_probability(Partition([2]), Partition([2]), p) == pytest.approx((1 - p) ** 2 + p**2)
    assert transition_probability(Partition([2]), Partition([1, 1]), p) == pytest.approx(2 * p * (1 - p))
    # from (1, 1) a single picked card just moves to a fresh pile
    assert transition_probability(Partition([1, 1]), Partition([2]), p) == pytest.approx(p**2)
    T = transition_matrix(2, 0.5)
    assert np.allclose(T, [[0.5, 0.5], [0.25, 0.75]])


@pytest.mark.parametrize("n", range(1, 9))
@pytest.mark.parametrize("p", [0.1, 0.5, 0.83])
def test_matrix_matches_card_level_enumeration(n, p):
    assert np.abs(transition_matrix(n, p) - oracle_matrix(n, p)).max() < 1e-13


def test_degenerate_probabilities():
    T0 = transition_matrix(5, 0.0)
    assert np.array_equal(T0, np.eye(len(T0)))
    T1 = transition_matrix(5, 1.0)
    # p = 1 gathers everything into one pile
    assert np.all(T1[:, 0] == 1.0)
    assert not is_irreducible(T0)


@pytest.mark.parametrize("n", [3, 7, 10])
def test_diagnostics(n):
    T = transition_matrix(n, 0.4)
    assert np.abs(T.sum(axis=1) - 1).max() < 1e-12
    assert is_irreducible(T)
    assert is_aperiodic_by_loops(T)


def test_stationary_small_values():
    assert stationary_exact(1, 0.4).probs.tolist() == [1.0]
    pi = stationary_exact(2, 0.5)
    assert pi[Partition([1, 1])] == pytest.approx(2 / 3, abs=1e-12)


def test_stationary_golden_n6():
    pi = stationary_exact(6, 0.3)
    assert np.abs(pi.probs - PI_6_03).max() < 1e-12
    T = transition_matrix(6, 0.3)
    assert np.abs(power_iteration(T) - pi.probs).max() < 1e-10
    assert stationary_residual(pi, T) <= 1e-12
    w, v = np.linalg.eig(oracle_matrix(6, 0.3).T)
    top = np.real(v[:, np.argmin(np.abs(w - 1))])
    assert np.abs(top / top.sum() - PI_6_03).max() < 1e-10


def test_distribution_vector_and_tv():
    index = enumerate_partitions(3)
    d = DistributionVector.from_counts(index, [1, 1, 2])
    assert d.probs.tolist() == [0.25, 0.25, 0.5]
    e = DistributionVector(index, np.array([0.5, 0.25, 0.25]))
    assert total_variation(d, e) == pytest.approx(0.25)
    assert total_variation(d, d) == 0.0
    with pytest.raises(ValueError):
        DistributionVector(index, np.array([0.5, 0.5, 0.5]))
    with pytest.raises(ValueError):
        total_variation(d, DistributionVector.from_counts(enumerate_partitions(2), [1, 1]))
