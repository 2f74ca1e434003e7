"""DDPM forward corruption, training loss, and ancestral sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..autodiff import Tensor, mse, no_grad
from ..errors import ConfigError, NanDetectedError, NavgateError
from .config import PolicyConfig
from .normalize import ActionNormalizer

LABEL_TOLERANCE = 1e-6


@dataclass(frozen=True)
class NoiseSchedule:
    betas: np.ndarray       # (K,) step variances, index k-1 holds beta_k
    alphas: np.ndarray      # (K,) 1 - beta
    alpha_bar: np.ndarray   # (K+1,) cumulative signal product, alpha_bar[0] == 1

    @property
    def steps(self) -> int:
        return len(self.betas)


def noise_schedule(steps: int, tag: str = "squared-cosine") -> NoiseSchedule:
    """Squared-cosine schedule; betas strictly inside (0, 1)."""
    if steps < 2:
        raise ConfigError(f"need at least 2 diffusion steps, got {steps}")
    if tag != "squared-cosine":
        raise ConfigError(f"unknown noise schedule {tag!r}")
    s = 0.008
    k = np.arange(steps + 1)
    f = np.cos((k / steps + s) / (1.0 + s) * np.pi / 2.0) ** 2
    raw = f / f[0]
    betas = np.clip(1.0 - raw[1:] / raw[:-1], 1e-8, 0.999)
    alphas = 1.0 - betas
    alpha_bar = np.concatenate([[1.0], np.cumprod(alphas)])
    return NoiseSchedule(betas=betas, alphas=alphas, alpha_bar=alpha_bar)


def corrupt(schedule: NoiseSchedule, x0: np.ndarray, k: np.ndarray,
            noise: np.ndarray) -> np.ndarray:
    """Forward process: x_k = sqrt(abar_k) x0 + sqrt(1 - abar_k) noise."""
    ab = schedule.alpha_bar[k].reshape((-1,) + (1,) * (x0.ndim - 1))
    return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * noise


EpsModel = Callable[[Tensor, np.ndarray], Tensor]
"""(noisy (B,2,L) tensor, step indices (B,)) -> noise prediction (B,2,L)."""


def ddpm_train_loss(eps_model: EpsModel, schedule: NoiseSchedule,
                    labels_norm: np.ndarray, rng: np.random.Generator) -> Tensor:
    """Denoising MSE on uniformly sampled steps and Gaussian noise.

    labels_norm: (B, H+1, 2) normalized to [-1, 1].
    """
    if np.max(np.abs(labels_norm)) > 1.0 + LABEL_TOLERANCE:
        raise NavgateError(
            f"labels exceed the normalized range: max |v| = {np.max(np.abs(labels_norm)):.4f}")
    b = labels_norm.shape[0]
    x0 = np.ascontiguousarray(labels_norm.transpose(0, 2, 1))   # (B, 2, L)
    k = rng.integers(1, schedule.steps + 1, size=b)
    noise = rng.standard_normal(x0.shape)
    x_k = corrupt(schedule, x0, k, noise)
    pred = eps_model(Tensor(x_k), k)
    return mse(pred, Tensor(noise))


def ddpm_sample(eps_model: EpsModel, schedule: NoiseSchedule, cfg: PolicyConfig,
                normalizer: ActionNormalizer, rng: np.random.Generator,
                n_samples: int, clip: float = 1.0) -> np.ndarray:
    """Ancestral denoising from pure noise; returns (n, H+1, 2) in meters.

    Each step recovers the clean-sequence estimate, clips it to the
    normalized action range, and samples the exact posterior around it; the
    clip bounds error amplification through the late high-variance steps.
    """
    length = cfg.length
    x = rng.standard_normal((n_samples, 2, length))
    with no_grad():
        for k in range(schedule.steps, 0, -1):
            eps = eps_model(Tensor(x), np.full(n_samples, k)).data
            if not np.all(np.isfinite(eps)):
                raise NanDetectedError(
                    f"non-finite noise prediction at step {k} "
                    f"(|x| max {np.abs(x).max():.3e})")
            beta = schedule.betas[k - 1]
            alpha = schedule.alphas[k - 1]
            ab_k = schedule.alpha_bar[k]
            ab_prev = schedule.alpha_bar[k - 1]
            x0 = (x - np.sqrt(1.0 - ab_k) * eps) / np.sqrt(ab_k)
            np.clip(x0, -clip, clip, out=x0)
            x = (np.sqrt(ab_prev) * beta * x0
                 + np.sqrt(alpha) * (1.0 - ab_prev) * x) / (1.0 - ab_k)
            if k > 1:
                sigma = np.sqrt((1.0 - ab_prev) / (1.0 - ab_k) * beta)
                x = x + sigma * rng.standard_normal(x.shape)
    if not np.all(np.isfinite(x)):
        raise NanDetectedError("non-finite sample after final denoise step")
    return normalizer.denormalize(x.transpose(0, 2, 1))
