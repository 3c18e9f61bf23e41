import math

import numpy as np
import pytest

import dpplab

L2 = [[2.0, 1.0], [1.0, 2.0]]


def test_pmf_table():
    table = dpplab.pmf_table(L2)
    assert table == pytest.approx([1 / 8, 1 / 4, 1 / 4, 3 / 8], abs=1e-12)
    assert dpplab.pmf(L2, [0, 1]) == pytest.approx(3 / 8, abs=1e-12)
    assert dpplab.inclusion_prob(L2, [0]) == pytest.approx(5 / 8, abs=1e-12)


def test_kernel_conversions():
    K = dpplab.l_to_k(L2)
    assert K == pytest.approx(np.array([[0.625, 0.125], [0.125, 0.625]]))
    assert dpplab.k_to_l(K) == pytest.approx(np.array(L2), abs=1e-10)


def test_sample_and_fit():
    draws = dpplab.sample(L2, 20000, seed=3)
    assert len(draws) == 20000
    assert all(set(d) <= {0, 1} for d in draws)
    result = dpplab.fit(draws, 2, restarts=2, seed=5)
    assert result["converged"]
    assert dpplab.loss(result["kernel"], L2) < 0.2
    assert result["grad_norm"] < 1e-6


def test_landscape():
    g = dpplab.gradient(L2, L2)
    assert np.abs(g).max() < 1e-10
    assert dpplab.expected_loglik(L2, L2) > dpplab.expected_loglik(
        L2, [[1.0, 0.0], [0.0, 1.0]]
    )
    eigs = dpplab.hessian_eigenvalues(L2)
    assert max(eigs) < 0.0  # irreducible kernel: strictly negative definite
    assert dpplab.degree_of_identifiability(L2) == 2


def test_structured_kernels():
    T = dpplab.tridiagonal_kernel(2.0, 0.5, 3)
    assert T[0][1] == pytest.approx(0.5)
    B = np.array(dpplab.random_block_kernel([[0, 1], [2, 3]], seed=7))
    assert B[:2, 2:] == pytest.approx(np.zeros((2, 2)))


def test_validation():
    with pytest.raises(dpplab.ValidationError):
        dpplab.pmf_table([[1.0, 2.0], [2.0, 1.0]])  # indefinite
    with pytest.raises(dpplab.ValidationError):
        dpplab.derivative_form(L2, L2, [[0.0, 1.0], [1.0, 0.0]], 5)


def test_version():
    assert dpplab.__version__ == "0.1.0"
