"""Whole-graph backward: reachability, accumulation, MLP finite differences."""

import numpy as np
import pytest

from navgate.autodiff import (
    ParameterStore, Tensor, backward, element_mul, linear, mse, relu,
)
from navgate.errors import NonScalarLossError

from helpers import fd_against_backward


def test_square_gradient():
    x = Tensor(np.array(3.0), requires_grad=True)
    loss = element_mul(x, x)
    backward(loss)
    assert np.allclose(x.grad, 6.0)


def test_unreachable_parameter_keeps_zero_grad():
    store = ParameterStore()
    x = store.add("x", np.array(2.0))
    y = store.add("y", np.array(5.0))
    store.zero_grad()
    loss = element_mul(x, x)
    backward(loss)
    assert np.allclose(x.grad, 4.0)
    assert np.array_equal(y.grad, 0.0)  # constant w.r.t. y


def test_grad_accumulates_over_shared_input():
    x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    loss = mse(element_mul(x, x), Tensor(np.zeros(2)))
    backward(loss)
    # loss = mean(x^4), both element_mul inputs alias x
    want = 4.0 * x.data ** 3 / 2.0
    assert np.allclose(x.grad, want)


def test_non_scalar_loss_rejected():
    x = Tensor(np.ones((2, 2)), requires_grad=True)
    with pytest.raises(NonScalarLossError):
        backward(relu(x))


def test_three_layer_mlp_matches_finite_differences():
    rng = np.random.default_rng(42)
    x = Tensor(rng.standard_normal((4, 6)))
    tgt = Tensor(rng.standard_normal((4, 2)))
    params = [
        Tensor(rng.standard_normal((6, 8)) * 0.5, requires_grad=True),
        Tensor(rng.standard_normal(8) * 0.1, requires_grad=True),
        Tensor(rng.standard_normal((8, 8)) * 0.5, requires_grad=True),
        Tensor(rng.standard_normal(8) * 0.1, requires_grad=True),
        Tensor(rng.standard_normal((8, 2)) * 0.5, requires_grad=True),
        Tensor(rng.standard_normal(2) * 0.1, requires_grad=True),
    ]

    def build(ps):
        h = relu(linear(x, ps[0], ps[1]))
        h = relu(linear(h, ps[2], ps[3]))
        return mse(linear(h, ps[4], ps[5]), tgt)

    assert fd_against_backward(build, params) < 1e-5
