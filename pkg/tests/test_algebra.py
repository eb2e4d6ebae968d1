"""
Tests for the matrix algebra service
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from czlab.exceptions import InvalidInput
from czlab.services import algebra
from czlab.services.corpus import random_hermitian, random_projection

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
dims = st.integers(min_value=1, max_value=5)


def test_spectral_proj_leq_on_a_diagonal_matrix():
    A = np.diag([0.0, 0.5, 1.0, 2.0])
    P = algebra.spectral_proj_leq(A, 1.0)
    assert np.allclose(np.real(np.diag(P)), [0, 1, 1, 0])
    P0 = algebra.spectral_proj_leq(A, 1.0, include_zero=True)
    assert np.allclose(np.real(np.diag(P0)), [1, 1, 1, 0])


def test_threshold_projections_split_the_identity():
    A = np.diag([0.5, 1.0, 3.0])
    total = algebra.spectral_proj_leq(A, 1.0, include_zero=True) + algebra.spectral_proj_gt(A, 1.0)
    assert np.allclose(total, np.eye(3))


def test_threshold_must_be_positive():
    with pytest.raises(InvalidInput):
        algebra.spectral_proj_leq(np.eye(2), 0.0)


def test_non_hermitian_input_is_rejected():
    with pytest.raises(InvalidInput):
        algebra.spectral_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


@given(seed=seeds, n=dims)
@settings(max_examples=40, deadline=None)
def test_func_calc_identity_reconstructs(seed, n):
    A = random_hermitian(np.random.default_rng(seed), (), n)
    assert np.allclose(algebra.func_calc(A, lambda x: x), A, atol=1e-10)


@given(seed=seeds, n=dims)
@settings(max_examples=40, deadline=None)
def test_positive_parts_are_psd_and_recombine(seed, n):
    A = random_hermitian(np.random.default_rng(seed), (), n)
    plus, minus = algebra.positive_parts(A)
    assert np.allclose(plus - minus, A, atol=1e-10)
    assert np.linalg.eigvalsh(plus).min() > -1e-10
    assert np.linalg.eigvalsh(minus).min() > -1e-10
    assert np.abs(plus @ minus).max() < 1e-9


@given(seed=seeds, n=st.integers(min_value=2, max_value=5))
@settings(max_examples=40, deadline=None)
def test_join_and_meet_lattice_laws(seed, n):
    rng = np.random.default_rng(seed)
    P = random_projection(rng, n, int(rng.integers(0, n + 1)))
    Q = random_projection(rng, n, int(rng.integers(0, n + 1)))
    join = algebra.proj_join([P, Q])
    meet = algebra.proj_meet([P, Q])
    assert algebra.is_projection(join) and algebra.is_projection(meet)
    # P <= P v Q and P ^ Q <= P
    assert np.allclose(join @ P, P, atol=1e-8)
    assert np.allclose(P @ meet, meet, atol=1e-8)
    # de Morgan
    eye = np.eye(n)
    assert np.allclose(eye - meet, algebra.proj_join([eye - P, eye - Q]), atol=1e-8)
    rank = lambda X: int(round(float(np.real(np.trace(X)))))
    assert rank(join) + rank(meet) == rank(P) + rank(Q)


def test_empty_join_and_meet_need_dimension():
    assert np.allclose(algebra.proj_join([], n=3), 0)
    assert np.allclose(algebra.proj_meet([], n=3), np.eye(3))
    with pytest.raises(InvalidInput):
        algebra.proj_join([])


def test_join_of_stacks_is_cellwise():
    e1 = np.diag([1.0, 0.0])
    e2 = np.diag([0.0, 1.0])
    stack_a = np.stack([e1, e1])
    stack_b = np.stack([e1, e2])
    joined = algebra.proj_join([stack_a, stack_b])
    assert np.allclose(joined[0], e1)
    assert np.allclose(joined[1], np.eye(2))


def test_schatten_norms_of_a_diagonal_matrix():
    A = np.diag([3.0, -4.0])
    assert algebra.schatten_norm(A, 1) == pytest.approx(7.0)
    assert algebra.schatten_norm(A, 2) == pytest.approx(5.0)
    assert algebra.schatten_norm(A, np.inf) == pytest.approx(4.0)
    with pytest.raises(InvalidInput):
        algebra.schatten_norm(A, 0.5)


def test_modulus_of_a_nilpotent_matrix():
    N = np.array([[0.0, 2.0], [0.0, 0.0]])
    assert np.allclose(algebra.modulus(N), np.diag([0.0, 2.0]), atol=1e-12)


def test_commuting_matrices_have_zero_commutator():
    A = np.diag([1.0, 2.0])
    B = np.diag([5.0, -1.0])
    assert float(algebra.commutator_norm(A, B)) == pytest.approx(0.0)
    assert float(algebra.commutator_norm(A, np.array([[0.0, 1.0], [1.0, 0.0]]))) > 0
