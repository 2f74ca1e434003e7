"""Sanity of the finite-difference harness itself."""

import numpy as np
import pytest

from navgate.autodiff import ParameterStore, Tensor, gradient_check, linear, mse, relu
from navgate.autodiff.tensor import Tensor as T
from navgate.errors import NonDeterministicForwardError


def test_quadratic_is_exact_to_roundoff():
    store = ParameterStore()
    store.add("w", np.array([1.5, -0.5, 2.0]))
    tgt = Tensor(np.array([1.0, 1.0, 1.0]))

    def forward(ps):
        return mse(ps["w"], tgt)

    assert gradient_check(forward, store, probe_count=3, h=1e-6) < 1e-9


def test_detects_corrupted_backward_rule(monkeypatch):
    from navgate.autodiff import ops

    orig = ops._OPS["relu"][0]

    def broken(attrs, x):
        out, _ = orig(attrs, x)

        def bwd(g, needs):
            return (np.where(x > 0.0, 0.5 * g, 0.0) if needs[0] else None,)  # wrong slope

        return out, bwd

    monkeypatch.setitem(ops._OPS, "relu", (broken, 1))

    rng = np.random.default_rng(0)
    store = ParameterStore()
    store.add("w", rng.standard_normal((4, 4)))
    x = Tensor(rng.standard_normal((2, 4)))
    tgt = Tensor(rng.standard_normal((2, 4)))

    def forward(ps):
        return mse(relu(linear(x, ps["w"], Tensor(np.zeros(4)))), tgt)

    assert gradient_check(forward, store, probe_count=16) > 1e-2


def test_rejects_nondeterministic_forward():
    store = ParameterStore()
    store.add("w", np.array([1.0]))
    rng = np.random.default_rng()  # unseeded on purpose

    def forward(ps):
        return mse(ps["w"], Tensor(rng.standard_normal(1)))

    with pytest.raises(NonDeterministicForwardError):
        gradient_check(forward, store, probe_count=1)
