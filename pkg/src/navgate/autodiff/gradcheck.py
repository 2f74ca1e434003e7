"""Finite-difference validation of analytic gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import NonDeterministicForwardError
from .params import ParameterStore
from .tensor import Tensor, backward


def relative_error(analytic: float, numeric: float, floor: float = 1e-6) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def gradient_check(
    model_forward: Callable[[ParameterStore], Tensor],
    store: ParameterStore,
    probe_count: int = 32,
    h: float = 1e-6,
    seed: int = 0,
) -> float:
    """Compare analytic gradients against central differences.

    `model_forward` must be a deterministic scalar-valued function of the
    store (re-seeded internally if it uses randomness). Probes sample
    `probe_count` coordinates uniformly across all trainable entries and
    return the worst relative error.
    """
    loss_a = model_forward(store)
    loss_b = model_forward(store)
    if loss_a.data.tobytes() != loss_b.data.tobytes():
        raise NonDeterministicForwardError(
            "two forward evaluations at identical parameters disagree")

    store.zero_grad()
    backward(loss_a)

    names = store.trainable_names()
    sizes = np.array([store[n].size for n in names], dtype=np.int64)
    total = int(sizes.sum())
    if total == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    flat_picks = rng.integers(0, total, size=min(probe_count, total))

    worst = 0.0
    bounds = np.cumsum(sizes)
    for flat in np.sort(flat_picks):
        which = int(np.searchsorted(bounds, flat, side="right"))
        offset = int(flat - (bounds[which - 1] if which else 0))
        param = store[names[which]]
        idx = np.unravel_index(offset, param.data.shape)
        analytic = float(param.grad[idx])

        orig = param.data[idx]
        param.data[idx] = orig + h
        f_plus = model_forward(store).item()
        param.data[idx] = orig - h
        f_minus = model_forward(store).item()
        param.data[idx] = orig
        numeric = (f_plus - f_minus) / (2.0 * h)
        worst = max(worst, relative_error(analytic, numeric))
    return worst
