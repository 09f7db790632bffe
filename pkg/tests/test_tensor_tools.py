# -*- coding: utf-8 -*-
"""Tests for tensor_tools module."""

import math

import numpy as np
import pytest

from hypothesis import given, settings
from hypothesis import strategies as st

from pyclstmcnn import tensor_tools as tt


def naive_matmul(a_matrix, b_matrix):
    rows, inner = a_matrix.shape
    cols = b_matrix.shape[1]
    out = np.zeros((rows, cols))
    for i in range(rows):
        for j in range(cols):
            out[i, j] = sum(a_matrix[i, k] * b_matrix[k, j]
                            for k in range(inner))
    return out


def test_matmul_examples():
    a_matrix = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(tt.matmul(a_matrix, np.eye(2)), a_matrix)
    assert np.array_equal(tt.matmul([[1, 2]], [[3], [4]]), [[11.0]])


def test_matmul_matches_triple_loop():
    rng = np.random.default_rng(0)
    a_matrix = rng.normal(size=(5, 7))
    b_matrix = rng.normal(size=(7, 3))
    assert np.allclose(tt.matmul(a_matrix, b_matrix),
                       naive_matmul(a_matrix, b_matrix),
                       rtol=0, atol=1e-12)


def test_matmul_is_associative():
    rng = np.random.default_rng(1)
    a_m, b_m, c_m = (rng.normal(size=(4, 5)), rng.normal(size=(5, 3)),
                     rng.normal(size=(3, 6)))
    left = tt.matmul(tt.matmul(a_m, b_m), c_m)
    right = tt.matmul(a_m, tt.matmul(b_m, c_m))
    assert np.allclose(left, right, rtol=1e-12, atol=1e-12)


def test_matmul_is_deterministic():
    rng = np.random.default_rng(2)
    a_matrix, b_matrix = rng.normal(size=(6, 6)), rng.normal(size=(6, 2))
    assert np.array_equal(tt.matmul(a_matrix, b_matrix),
                          tt.matmul(a_matrix, b_matrix))


def test_matmul_rejects_mismatched_shapes():
    with pytest.raises(AssertionError, match=r'\(2, 3\) and \(2, 3\)'):
        tt.matmul(np.zeros((2, 3)), np.zeros((2, 3)))


def test_matmul_rejects_non_finite():
    with pytest.raises(FloatingPointError):
        tt.matmul([[np.nan]], [[1.0]])
    with np.errstate(over='ignore'):
        with pytest.raises(FloatingPointError):
            tt.matmul([[1e308]], [[1e308]])


def test_softmax_examples():
    assert np.allclose(tt.softmax([0.0, 0.0, 0.0]), [1 / 3] * 3)
    large = tt.softmax([1000.0, 0.0])
    assert np.all(np.isfinite(large))
    assert large[0] == pytest.approx(1.0)
    exps = np.exp([1.0, 2.0, 3.0])
    assert np.allclose(tt.softmax([1.0, 2.0, 3.0]), exps / exps.sum())


def test_softmax_rejects_empty():
    with pytest.raises(AssertionError):
        tt.softmax([])


@settings(max_examples=200)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=20),
       st.floats(-100, 100))
def test_softmax_shift_invariance(values, shift):
    probs = tt.softmax(values)
    assert np.sum(probs) == pytest.approx(1.0, abs=1e-12)
    assert np.all(probs >= 0)
    assert np.allclose(tt.softmax(np.asarray(values) + shift), probs,
                       rtol=0, atol=1e-12)


def test_elementwise_values():
    assert tt.elementwise('tanh', [[0.0]])[0, 0] == 0.0
    assert tt.elementwise('sigmoid', [0.0])[0] == 0.5
    assert tt.elementwise('sigmoid', [2.0])[0] == pytest.approx(
        1 / (1 + math.exp(-2.0)), abs=1e-15)
    assert np.array_equal(tt.elementwise('relu', [-1.0, 0.0, 2.5]),
                          [0.0, 0.0, 2.5])


def test_elementwise_unknown_operation():
    with pytest.raises(AssertionError, match='softplus'):
        tt.elementwise('softplus', [1.0])


def test_finite_diff_grad_of_square():
    grad = tt.finite_diff_grad(lambda x: float(x[0] ** 2), np.array([3.0]))
    assert grad[0] == pytest.approx(6.0, abs=1e-6)


def test_finite_diff_grad_of_constant_is_zero():
    grad = tt.finite_diff_grad(lambda x: 4.2, np.ones((2, 3)))
    assert np.array_equal(grad, np.zeros((2, 3)))


def test_finite_diff_grad_of_sine_sum():
    x_values = np.random.default_rng(3).normal(size=10)
    grad = tt.finite_diff_grad(lambda x: float(np.sum(np.sin(x))), x_values)
    assert np.allclose(grad, np.cos(x_values), rtol=0, atol=1e-6)


def test_finite_diff_grad_leaves_input_untouched():
    x_values = np.array([1.0, 2.0])
    tt.finite_diff_grad(lambda x: float(x @ x), x_values)
    assert np.array_equal(x_values, [1.0, 2.0])


def test_finite_diff_grad_errors():
    with pytest.raises(AssertionError):
        tt.finite_diff_grad(lambda x: 0.0, np.ones(2), eps=0.0)
    with pytest.raises(FloatingPointError):
        tt.finite_diff_grad(lambda x: math.inf, np.ones(2))


def test_max_relative_error():
    assert tt.max_relative_error([1.0, 0.0], [1.0, 0.0]) == 0.0
    assert tt.max_relative_error([1.0], [3.0]) == pytest.approx(0.5)


def test_uniform_samples_bounds():
    samples = tt.uniform_samples(np.random.default_rng(4), (1000,), 0.25)
    assert samples.shape == (1000,)
    assert np.all(np.abs(samples) <= 0.25)
