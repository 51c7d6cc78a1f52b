"""Simplex projection and the fixed allocation constructions."""

import numpy as np
import pytest

import alohaopt as ao
from alohaopt.harness.selftest import grid_projection_oracle
from alohaopt.metrics import expected_throughput_enumerate


def test_projection_examples():
    assert np.allclose(ao.project_row_simplex([0.6, 0.6]), [0.5, 0.5])
    assert np.allclose(ao.project_row_simplex([1.2, -0.2]), [1.0, 0.0])


def test_projection_identity_on_simplex():
    rng = np.random.default_rng(0)
    for _ in range(50):
        v = rng.dirichlet(np.ones(4))
        assert np.allclose(ao.project_row_simplex(v), v, atol=1e-15)


@pytest.mark.parametrize("k", [2, 3])
def test_projection_against_grid_oracle(k):
    rng = np.random.default_rng(k)
    for _ in range(15):
        v = rng.uniform(-2.0, 2.0, k)
        u = ao.project_row_simplex(v)
        assert u.min() >= 0.0 and u.sum() == pytest.approx(1.0, abs=1e-12)
        d2 = float(np.sum((u - v) ** 2))
        assert d2 <= grid_projection_oracle(v) + 1e-6


def test_projection_idempotent_exactly():
    rng = np.random.default_rng(1)
    for _ in range(100):
        u = ao.project_row_simplex(rng.normal(size=5) * 3)
        assert np.array_equal(ao.project_row_simplex(u), u)


def test_projection_preserves_order():
    rng = np.random.default_rng(2)
    for _ in range(200):
        v = rng.normal(size=6)
        u = ao.project_row_simplex(v)
        order = np.argsort(v)
        assert np.all(np.diff(u[order]) >= -1e-15)


def test_project_allocation():
    rng = np.random.default_rng(3)
    A = ao.random_allocation(4, 3, rng)
    assert np.allclose(ao.project_allocation(A), A, atol=1e-15)
    Z = ao.project_allocation(np.zeros((5, 4)))
    assert np.allclose(Z, 0.25)
    assert np.allclose(ao.project_allocation(np.array([[2.0, 0.0, 0.0]])),
                       [[1.0, 0.0, 0.0]])


def test_aloha_allocation():
    assert np.allclose(ao.aloha_allocation(2, 2), 0.5)
    assert np.allclose(ao.aloha_allocation(1, 1), 1.0)
    A = ao.aloha_allocation(20, 5)
    assert A.shape == (20, 5) and np.allclose(A, 0.2)


def test_greedy_allocation_example():
    p = [0.3, 0.4, 0.9]
    A = ao.greedy_allocation(p, 2)
    assert np.array_equal(A, [[1, 0], [1, 0], [0, 1]])
    assert expected_throughput_enumerate(A, p) == pytest.approx(1.36)


def test_greedy_allocation_square_is_permutation():
    p = [0.1, 0.5, 0.9]
    A = ao.greedy_allocation(p, 3)
    assert np.array_equal(A.sum(axis=0), np.ones(3))
    assert np.array_equal(A.sum(axis=1), np.ones(3))
    assert set(np.unique(A)) == {0.0, 1.0}


def test_greedy_allocation_tie_break_by_index():
    # equal probabilities: the highest-indexed device counts as most active
    A = ao.greedy_allocation([0.4, 0.4, 0.4], 2)
    assert np.array_equal(A, [[1, 0], [1, 0], [0, 1]])


def test_greedy_allocation_tie_permutation_stability():
    # permuting devices with equal p only re-labels rows via the index rule
    p = [0.2, 0.7, 0.2, 0.7]
    A = ao.greedy_allocation(p, 3)
    # devices 1 and 3 are the two most active; 3 outranks 1 by index
    assert A[3, 1] == 1.0 and A[1, 2] == 1.0
    assert A[0, 0] == 1.0 and A[2, 0] == 1.0


def test_greedy_allocation_rejects_degenerate():
    with pytest.raises(ValueError):
        ao.greedy_allocation([0.5, 0.5], 3)  # N < K
    with pytest.raises(ValueError):
        ao.greedy_allocation([0.5, 0.5], 1)  # K < 2


def test_random_allocation_invariants():
    rng = np.random.default_rng(4)
    A = ao.random_allocation(50, 5, rng)
    assert np.all(A >= 0) and np.allclose(A.sum(axis=1), 1.0, atol=1e-12)
    assert np.allclose(ao.random_allocation(7, 1, rng), 1.0)


def test_random_allocation_flat_dirichlet_moments():
    rng = np.random.default_rng(5)
    A = ao.random_allocation(100_000, 4, rng)
    assert np.all(np.abs(A.mean(axis=0) - 0.25) < 0.01)
