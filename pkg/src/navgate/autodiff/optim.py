"""AdamW with decoupled weight decay, plus the warmup+cosine LR schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import MissingGradientError, NavgateError
from .params import ParameterStore


@dataclass
class OptimizerState:
    """Per-parameter Adam moments keyed by parameter name."""

    base_lr: float
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    weight_decay: float = 1e-4
    step_count: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    _scratch: dict[str, np.ndarray] = field(default_factory=dict)


def adamw_step(store: ParameterStore, state: OptimizerState, lr: float) -> None:
    """One decoupled-weight-decay Adam update over the trainable entries.

    Frozen entries are never read or written. Raises MissingGradientError if
    a trainable entry has no gradient buffer. Updates run in place through a
    per-parameter scratch buffer to keep the step allocation-free.
    """
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.betas
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t
    for name in store.trainable_names():
        p = store[name]
        if p.grad is None:
            raise MissingGradientError(f"trainable parameter {name!r} has no gradient")
        g = p.grad
        if name not in state.m:
            state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)
            state._scratch[name] = np.empty_like(p.data)
        m = state.m[name]
        v = state.v[name]
        s = state._scratch[name]
        m *= b1
        np.multiply(g, 1.0 - b1, out=s)
        m += s
        v *= b2
        np.multiply(g, g, out=s)
        s *= 1.0 - b2
        v += s
        if state.weight_decay:
            p.data *= 1.0 - lr * state.weight_decay
        np.divide(v, bc2, out=s)
        np.sqrt(s, out=s)
        s += state.eps
        np.divide(m, s, out=s)
        s *= lr / bc1
        p.data -= s
        if not np.all(np.isfinite(p.data)):
            raise NavgateError(f"non-finite values in parameter {name!r} after optimizer step")


def cosine_warmup_lr(step: int, warmup_steps: int, total_steps: int, base_lr: float) -> float:
    """Linear ramp 0 -> base_lr over the warmup, then cosine decay to 0."""
    if not (0 < warmup_steps < total_steps):
        raise ValueError(f"need 0 < warmup_steps < total_steps, got {warmup_steps}, {total_steps}")
    if not (0 <= step <= total_steps):
        raise ValueError(f"step {step} outside [0, {total_steps}]")
    if step < warmup_steps:
        return base_lr * step / warmup_steps
    progress = (step - warmup_steps) / (total_steps - warmup_steps)
    return base_lr * 0.5 * (1.0 + math.cos(math.pi * progress))
