"""AdamW step contracts and the warmup+cosine schedule."""

import numpy as np
import pytest

from navgate.autodiff import OptimizerState, ParameterStore, adamw_step, cosine_warmup_lr
from navgate.errors import MissingGradientError


def make_store(w=1.0, trainable=True):
    store = ParameterStore()
    store.add("w", np.array(w), trainable=trainable)
    return store


def test_first_step_sign_and_bound():
    store = make_store(1.0)
    state = OptimizerState(base_lr=0.1, weight_decay=0.0)
    store["w"].grad = np.array(1.0)
    adamw_step(store, state, lr=0.1)
    delta = store["w"].data - 1.0
    assert delta < 0.0
    assert abs(delta) <= 0.1 + 1e-12


def test_frozen_entry_bit_identical():
    store = ParameterStore()
    frozen = store.add("frozen", np.array([1.0, -2.0, 3.0]), trainable=False)
    store.add("free", np.array([0.5]), trainable=True)
    before = frozen.data.tobytes()
    state = OptimizerState(base_lr=0.1)
    frozen.grad = np.array([10.0, 10.0, 10.0])  # must be ignored
    store["free"].grad = np.array([1.0])
    for _ in range(5):
        adamw_step(store, state, lr=0.1)
    assert frozen.data.tobytes() == before
    assert store["free"].data[0] != 0.5


def test_two_steps_match_hand_recurrence():
    lr, b1, b2, eps, wd = 0.05, 0.9, 0.999, 1e-8, 0.01
    g = 0.3
    store = make_store(2.0)
    state = OptimizerState(base_lr=lr, betas=(b1, b2), eps=eps, weight_decay=wd)

    w = 2.0
    m = v = 0.0
    for t in (1, 2):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        w *= 1 - lr * wd
        w -= lr * (m / (1 - b1 ** t)) / (np.sqrt(v / (1 - b2 ** t)) + eps)
        store["w"].grad = np.array(g)
        adamw_step(store, state, lr=lr)

    assert np.allclose(store["w"].data, w, rtol=0, atol=1e-14)
    assert state.v["w"] > 0.0
    assert state.step_count == 2


def test_missing_gradient_raises():
    store = make_store(1.0)
    state = OptimizerState(base_lr=0.1)
    with pytest.raises(MissingGradientError):
        adamw_step(store, state, lr=0.1)


def test_schedule_endpoints_and_midpoint():
    base = 3e-4
    assert cosine_warmup_lr(0, 10, 100, base) == 0.0
    assert cosine_warmup_lr(10, 10, 100, base) == pytest.approx(base)
    # halfway through the cosine segment: cos(pi/2) = 0 -> base/2
    assert cosine_warmup_lr(55, 10, 100, base) == pytest.approx(base / 2)
    assert cosine_warmup_lr(100, 10, 100, base) == pytest.approx(0.0, abs=1e-18)


def test_schedule_warmup_is_linear():
    base = 1.0
    lrs = [cosine_warmup_lr(s, 4, 20, base) for s in range(5)]
    assert np.allclose(lrs, [0.0, 0.25, 0.5, 0.75, 1.0])


@pytest.mark.parametrize("step,warmup,total", [(-1, 5, 10), (11, 5, 10), (3, 0, 10), (3, 10, 10)])
def test_schedule_domain_errors(step, warmup, total):
    with pytest.raises(ValueError):
        cosine_warmup_lr(step, warmup, total, 1.0)
