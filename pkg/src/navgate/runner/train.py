"""Shared mini-batch training loop (pre-training and fine-tuning)."""

from __future__ import annotations

import numpy as np

from ..autodiff import OptimizerState, adamw_step, backward, cosine_warmup_lr
from ..errors import DatasetError
from ..metrics.benchmark import episode_window
from ..policy.normalize import ActionNormalizer
from ..sim.dataset import NavsetReader, derive_seed
from ..variants import Policy


class WindowDataset:
    """All episodes decoded to RAM plus the flat (episode, step) index."""

    def __init__(self, reader: NavsetReader):
        self.episodes = [reader.episode(i) for i in range(len(reader))]
        self.index = reader.window_index()
        if not self.index:
            raise DatasetError("dataset has no windows")

    def batch(self, picks: np.ndarray, frames: int, normalizer: ActionNormalizer):
        windows = []
        goals = []
        labels = []
        for flat in picks:
            e, t = self.index[flat]
            ep = self.episodes[e]
            windows.append(episode_window(ep, t, frames))
            goals.append(ep.goal_image)
            labels.append(ep.labels[t])
        return (np.stack(windows), np.stack(goals),
                normalizer.normalize(np.stack(labels)))

    def fit_normalizer(self) -> ActionNormalizer:
        flat = np.concatenate([ep.labels.reshape(-1, 2) for ep in self.episodes])
        return ActionNormalizer.fit(flat.reshape(-1, 1, 2))


def train_policy(policy: Policy, data: WindowDataset, epochs: int, batch_size: int,
                 base_lr: float, warmup_frac: float, weight_decay: float,
                 seed: int, log_every: int = 50, quiet: bool = False) -> list[float]:
    """AdamW + warmup/cosine schedule; returns the per-step loss curve."""
    n = len(data.index)
    steps_per_epoch = max(n // batch_size, 1)
    total = epochs * steps_per_epoch
    warmup = max(int(total * warmup_frac), 1)
    state = OptimizerState(base_lr=base_lr, weight_decay=weight_decay)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x7EA1)))

    curve: list[float] = []
    step = 0
    for _epoch in range(epochs):
        perm = rng.permutation(n)
        for b in range(steps_per_epoch):
            picks = perm[b * batch_size:(b + 1) * batch_size]
            windows, goals, labels = data.batch(picks, policy.cfg.frames, policy.normalizer)
            loss = policy.loss(windows, goals, labels, rng)
            policy.store.zero_grad()
            backward(loss)
            lr = cosine_warmup_lr(step, warmup, total, base_lr)
            adamw_step(policy.store, state, lr)
            curve.append(loss.item())
            if not quiet and step % log_every == 0:
                print(f"    step {step}/{total} loss {curve[-1]:.4f} lr {lr:.2e}", flush=True)
            step += 1
    return curve


def save_loss_curve(path, curve: list[float]) -> None:
    lines = ["step\tloss"] + [f"{i}\t{v!r}" for i, v in enumerate(curve)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def training_seed(master: int, stage: str) -> int:
    return derive_seed(master, "train", stage)
