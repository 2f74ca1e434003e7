"""Shared test utilities: finite-difference probes and tiny-model builders."""

from __future__ import annotations

import numpy as np

from navgate.autodiff import Tensor, backward, mse
from navgate.autodiff.gradcheck import relative_error


def fd_against_backward(build, tensors, h=1e-6, probes_per_input=12, seed=0):
    """Max relative error between backward() grads and central differences.

    `build(tensors) -> scalar Tensor` must be deterministic and re-runnable;
    `tensors` are the leaf inputs to probe (requires_grad is forced on).
    """
    for t in tensors:
        t.requires_grad = True
        t.grad = None
    loss = build(tensors)
    backward(loss)
    analytic = [t.grad.copy() if t.grad is not None else np.zeros_like(t.data) for t in tensors]

    rng = np.random.default_rng(seed)
    worst = 0.0
    for ti, t in enumerate(tensors):
        flat = t.data.reshape(-1)
        n = flat.size
        picks = rng.choice(n, size=min(probes_per_input, n), replace=False)
        for i in picks:
            orig = flat[i]
            flat[i] = orig + h
            f_plus = build(tensors).item()
            flat[i] = orig - h
            f_minus = build(tensors).item()
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2 * h)
            worst = max(worst, relative_error(analytic[ti].reshape(-1)[i], numeric))
    return worst


def scalarize(out, target):
    """Reduce an op output to a generic scalar via MSE against a fixed target."""
    return mse(out, target)


def random_tensor(rng, shape, scale=1.0):
    return Tensor(rng.standard_normal(shape) * scale, requires_grad=True)
