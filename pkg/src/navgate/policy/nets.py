"""Policy networks as pure functions over a ParameterStore.

All forwards take a name prefix so the frozen backbone ("") and its
trainable copy ("depth.") share one set of definitions. Shapes are batched
throughout: observations (B, C, W), token sequences (B, n, d), U-Net
features (B, C, L).
"""

from __future__ import annotations

import math

import numpy as np

from ..autodiff import (
    ParameterStore, Tensor, add, concat, conv1d, element_mul, layernorm,
    linear, matmul, relu, mish, reshape, scalar_mul, slice_, softmax, transpose,
)
from ..errors import ShapeMismatchError
from .config import PolicyConfig

N_HEADS = 4


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------

def _lin(store, rng, name, fan_in, fan_out, scale=1.0, zero=False):
    if zero:
        w = np.zeros((fan_in, fan_out))
    else:
        w = rng.standard_normal((fan_in, fan_out)) * (scale / math.sqrt(fan_in))
    store.add(name + ".w", w)
    store.add(name + ".b", np.zeros(fan_out))


def _conv(store, rng, name, c_out, c_in, k, zero=False):
    if zero:
        w = np.zeros((c_out, c_in, k))
    else:
        w = rng.standard_normal((c_out, c_in, k)) * (1.0 / math.sqrt(c_in * k))
    store.add(name + ".w", w)
    store.add(name + ".b", np.zeros(c_out))


def _norm(store, name, width):
    store.add(name + ".g", np.ones(width))
    store.add(name + ".b", np.zeros(width))


def init_policy_params(store: ParameterStore, cfg: PolicyConfig,
                       rng: np.random.Generator, prefix: str = "") -> None:
    """Populate `store` with a freshly initialized policy under `prefix`.

    The output head starts at zero so an untrained net predicts zero noise;
    everything else uses fan-in scaled Gaussian init.
    """
    d = cfg.embed_dim
    w = cfg.rays
    c1, c2, c3 = cfg.channels
    p = prefix

    _lin(store, rng, p + "obsgoal.fc1", 6 * w, 2 * d)
    _lin(store, rng, p + "obsgoal.fc2", 2 * d, d)
    _lin(store, rng, p + "hist.fc1", 3 * w, 2 * d)
    _lin(store, rng, p + "hist.fc2", 2 * d, d)
    store.add(p + "hist.pos", rng.standard_normal((cfg.frames, d)) * 0.02)

    _norm(store, p + "fuse.ln1", d)
    _lin(store, rng, p + "fuse.qkv", d, 3 * d)
    _lin(store, rng, p + "fuse.attn", d, d)
    _norm(store, p + "fuse.ln2", d)
    _lin(store, rng, p + "fuse.mlp1", d, 2 * d)
    _lin(store, rng, p + "fuse.mlp2", 2 * d, d)

    _lin(store, rng, p + "time.fc1", d, d)
    _lin(store, rng, p + "time.fc2", d, d)

    _conv(store, rng, p + "unet.stem", c1, 2, 3)
    _resblock_init(store, rng, p + "unet.down", c1, c1, d)
    _conv(store, rng, p + "unet.pool", c2, c1, 3)
    _resblock_init(store, rng, p + "unet.mid", c2, c2, d)
    _resblock_init(store, rng, p + "unet.up", c2 + c1, c3, d)
    _conv(store, rng, p + "unet.head", 2, c3, 3, zero=True)


def _resblock_init(store, rng, name, c_in, c_out, d):
    _conv(store, rng, name + ".conv1", c_out, c_in, 3)
    _norm(store, name + ".norm", c_out)
    _lin(store, rng, name + ".film", 2 * d, 2 * c_out)
    _conv(store, rng, name + ".conv2", c_out, c_out, 3)
    if c_in != c_out:
        _conv(store, rng, name + ".skip", c_out, c_in, 1)


# ---------------------------------------------------------------------------
# encoders and context fusion
# ---------------------------------------------------------------------------

def _p(store, prefix, name):
    return store[prefix + name]


def encode_observation(store, prefix, cfg, obs_rgb: Tensor, goal_rgb: Tensor) -> Tensor:
    """(B, 3, W) current frame + (B, 3, W) goal -> (B, d) token."""
    b = obs_rgb.shape[0]
    if obs_rgb.shape[1:] != (3, cfg.rays) or goal_rgb.shape[1:] != (3, cfg.rays):
        raise ShapeMismatchError(
            f"observation/goal shape {obs_rgb.shape}/{goal_rgb.shape} "
            f"does not match 3x{cfg.rays}")
    x = concat([reshape(obs_rgb, (b, 3 * cfg.rays)), reshape(goal_rgb, (b, 3 * cfg.rays))], axis=1)
    h = relu(linear(x, _p(store, prefix, "obsgoal.fc1.w"), _p(store, prefix, "obsgoal.fc1.b")))
    return linear(h, _p(store, prefix, "obsgoal.fc2.w"), _p(store, prefix, "obsgoal.fc2.b"))


def encode_history(store, prefix, cfg, window_rgb: Tensor) -> Tensor:
    """(B, T+1, 3, W) history -> (B, T+1, d) tokens with position offsets."""
    b = window_rgb.shape[0]
    if window_rgb.shape[1:] != (cfg.frames, 3, cfg.rays):
        raise ShapeMismatchError(
            f"history window shape {window_rgb.shape} does not match "
            f"(B, {cfg.frames}, 3, {cfg.rays})")
    x = reshape(window_rgb, (b, cfg.frames, 3 * cfg.rays))
    h = relu(linear(x, _p(store, prefix, "hist.fc1.w"), _p(store, prefix, "hist.fc1.b")))
    tokens = linear(h, _p(store, prefix, "hist.fc2.w"), _p(store, prefix, "hist.fc2.b"))
    return add(tokens, _p(store, prefix, "hist.pos"))


def _attention(store, prefix, cfg, tokens: Tensor) -> Tensor:
    d = cfg.embed_dim
    dh = d // N_HEADS
    n = tokens.shape[1]
    h = layernorm(tokens, _p(store, prefix, "fuse.ln1.g"), _p(store, prefix, "fuse.ln1.b"))
    qkv = linear(h, _p(store, prefix, "fuse.qkv.w"), _p(store, prefix, "fuse.qkv.b"))
    heads = []
    for i in range(N_HEADS):
        cols = lambda base: (slice(None), slice(None), slice(base + i * dh, base + (i + 1) * dh))
        q = slice_(qkv, cols(0))
        k = slice_(qkv, cols(d))
        v = slice_(qkv, cols(2 * d))
        scores = scalar_mul(matmul(q, k, transpose_b=True), 1.0 / math.sqrt(dh))
        heads.append(matmul(softmax(scores, axis=-1), v))
    attended = linear(concat(heads, axis=2),
                      _p(store, prefix, "fuse.attn.w"), _p(store, prefix, "fuse.attn.b"))
    x = add(tokens, attended)
    h2 = layernorm(x, _p(store, prefix, "fuse.ln2.g"), _p(store, prefix, "fuse.ln2.b"))
    m = linear(relu(linear(h2, _p(store, prefix, "fuse.mlp1.w"), _p(store, prefix, "fuse.mlp1.b"))),
               _p(store, prefix, "fuse.mlp2.w"), _p(store, prefix, "fuse.mlp2.b"))
    return add(x, m)


def fuse_context(store, prefix, cfg, history_tokens: Tensor, obs_goal_token: Tensor) -> Tensor:
    """Self-attention over the T+2 tokens, mean-pooled to the context vector."""
    b = history_tokens.shape[0]
    tok = concat([history_tokens, reshape(obs_goal_token, (b, 1, cfg.embed_dim))], axis=1)
    out = _attention(store, prefix, cfg, tok)
    n = tok.shape[1]
    pool = Tensor(np.full((1, n), 1.0 / n))
    return reshape(matmul(pool, out), (b, cfg.embed_dim))


def compute_context(store, prefix, cfg, window_rgb: Tensor, goal_rgb: Tensor) -> Tensor:
    """(B, T+1, 3, W) window + (B, 3, W) goal -> (B, d) context vector."""
    hist = encode_history(store, prefix, cfg, window_rgb)
    b = window_rgb.shape[0]
    current = slice_(window_rgb, (slice(None), slice(cfg.frames - 1, cfg.frames)))
    obsgoal = encode_observation(store, prefix, cfg, reshape(current, (b, 3, cfg.rays)), goal_rgb)
    return fuse_context(store, prefix, cfg, hist, obsgoal)


# ---------------------------------------------------------------------------
# conditional 1-D U-Net
# ---------------------------------------------------------------------------

_SINCOS_CACHE: dict[tuple[int, int], np.ndarray] = {}


def sinusoidal_table(steps: int, dim: int) -> np.ndarray:
    """(steps+1, dim) sin/cos position features for the diffusion step index."""
    key = (steps, dim)
    if key not in _SINCOS_CACHE:
        half = dim // 2
        freqs = np.exp(-math.log(10_000.0) * np.arange(half) / max(half - 1, 1))
        phases = np.arange(steps + 1)[:, None] * freqs[None, :]
        _SINCOS_CACHE[key] = np.concatenate([np.sin(phases), np.cos(phases)], axis=1)
    return _SINCOS_CACHE[key]


def _channel_norm(store, prefix, name, h: Tensor) -> Tensor:
    return layernorm(h, _p(store, prefix, name + ".g"), _p(store, prefix, name + ".b"), axis=1)


def _resblock(store, prefix, name, cfg, x: Tensor, cond: Tensor) -> Tensor:
    c_out = _p(store, prefix, name + ".conv1.w").shape[0]
    b = x.shape[0]
    h = conv1d(x, _p(store, prefix, name + ".conv1.w"), _p(store, prefix, name + ".conv1.b"),
               stride=1, padding=1)
    h = _channel_norm(store, prefix, name + ".norm", h)
    film = linear(cond, _p(store, prefix, name + ".film.w"), _p(store, prefix, name + ".film.b"))
    scale = reshape(slice_(film, (slice(None), slice(0, c_out))), (b, c_out, 1))
    shift = reshape(slice_(film, (slice(None), slice(c_out, 2 * c_out))), (b, c_out, 1))
    h = add(element_mul(h, add(scale, Tensor(np.ones(1)))), shift)
    h = relu(h)
    h = conv1d(h, _p(store, prefix, name + ".conv2.w"), _p(store, prefix, name + ".conv2.b"),
               stride=1, padding=1)
    if prefix + name + ".skip.w" in store:
        x = conv1d(x, _p(store, prefix, name + ".skip.w"), _p(store, prefix, name + ".skip.b"))
    return add(h, x)


def _upsample2(x: Tensor) -> Tensor:
    b, c, l = x.shape
    col = reshape(x, (b, c, l, 1))
    return reshape(concat([col, col], axis=3), (b, c, 2 * l))


def unet_apply(store, prefix, cfg, noisy: Tensor, k_idx: np.ndarray, context: Tensor,
               inject: list[Tensor] | None = None) -> tuple[Tensor, list[Tensor]]:
    """Denoiser forward.

    noisy: (B, 2, H+1) corrupted action sequence (channels first)
    k_idx: (B,) diffusion step per item, in [1, K]
    context: (B, d) fused context vector
    inject: optional per-stage residuals added to the stage outputs
            (the prior-preserving pathway of the gated variants)

    Returns the noise prediction (B, 2, H+1) and the three stage features.
    """
    k_idx = np.asarray(k_idx)
    if np.any(k_idx < 1) or np.any(k_idx > cfg.diffusion_steps):
        raise ValueError(f"diffusion step out of range [1, {cfg.diffusion_steps}]: {k_idx}")
    if noisy.shape[1:] != (2, cfg.length):
        raise ShapeMismatchError(f"noisy actions {noisy.shape} do not match (B, 2, {cfg.length})")
    if inject is not None and len(inject) != cfg.stages:
        raise ShapeMismatchError(
            f"expected {cfg.stages} injection tensors, got {len(inject)}")

    temb = Tensor(sinusoidal_table(cfg.diffusion_steps, cfg.embed_dim)[k_idx])
    t = linear(mish(linear(temb, _p(store, prefix, "time.fc1.w"),
                           _p(store, prefix, "time.fc1.b"))),
               _p(store, prefix, "time.fc2.w"), _p(store, prefix, "time.fc2.b"))
    cond = concat([context, t], axis=1)

    h = conv1d(noisy, _p(store, prefix, "unet.stem.w"), _p(store, prefix, "unet.stem.b"),
               stride=1, padding=1)

    y1 = _resblock(store, prefix, "unet.down", cfg, h, cond)
    if inject is not None:
        y1 = add(y1, inject[0])
    pooled = conv1d(y1, _p(store, prefix, "unet.pool.w"), _p(store, prefix, "unet.pool.b"),
                    stride=2, padding=1)

    y2 = _resblock(store, prefix, "unet.mid", cfg, pooled, cond)
    if inject is not None:
        y2 = add(y2, inject[1])

    up = concat([_upsample2(y2), y1], axis=1)
    y3 = _resblock(store, prefix, "unet.up", cfg, up, cond)
    if inject is not None:
        y3 = add(y3, inject[2])

    eps = conv1d(y3, _p(store, prefix, "unet.head.w"), _p(store, prefix, "unet.head.b"),
                 stride=1, padding=1)
    return eps, [y1, y2, y3]


def unet_forward(store, cfg, noisy_hw2, k: int, context: Tensor,
                 prefix: str = "") -> tuple[Tensor, list[Tensor]]:
    """Single-sequence wrapper: (H+1, 2) in, (H+1, 2) noise prediction out."""
    x = Tensor(np.asarray(noisy_hw2, dtype=np.float64).T[None])
    c = reshape(context, (1, cfg.embed_dim))
    eps, stages = unet_apply(store, prefix, cfg, x, np.array([k]), c)
    return transpose(reshape(eps, (2, cfg.length)), (1, 0)), stages
