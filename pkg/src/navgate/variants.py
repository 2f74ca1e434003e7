"""Fine-tuning variants over a pre-trained policy checkpoint.

    zero-shot        frozen pre-trained policy, RGB input
    full-ft          same architecture, every parameter trainable, RGB input
    early-fusion     trainable depth token encoder + 1x1 token projection,
                     everything trainable, RGB-D input
    depth-gated      frozen trunk + trainable bit-exact copy fed RGB-D through
                     a 4->3 embedding; zero-initialized 1x1 gates feed the
                     copy's stage features back into the frozen trunk
    depth-gated-rgb  depth-gated without the depth channel (ablation): the
                     copy consumes the same RGB the trunk sees

The gated variants are exactly the pre-trained policy at initialization:
all gates are zero, so every injected residual is identically zero.
"""

from __future__ import annotations

import numpy as np

from .autodiff import (
    ParameterStore, Tensor, add, concat, conv1d, linear, matmul, relu, reshape, slice_,
)
from .autodiff.tensor import no_grad
from .checkpoint import load_checkpoint, save_checkpoint
from .errors import CheckpointError, NavgateError
from .policy.config import PolicyConfig
from .policy.diffusion import ddpm_sample, ddpm_train_loss, noise_schedule
from .policy.nets import compute_context, init_policy_params, unet_apply
from .policy.normalize import ActionNormalizer

VARIANTS = ("zero-shot", "full-ft", "early-fusion", "depth-gated", "depth-gated-rgb")
GATED_VARIANTS = ("depth-gated", "depth-gated-rgb")
DEPTH_PREFIX = "depth."
GATE_PLACEMENT = "pre-unet conditioning gate + one post-stage gate per stage"


def trainable_prefixes(variant: str) -> tuple[str, ...] | None:
    """Prefixes of trainable parameters; None means everything is trainable."""
    if variant == "zero-shot":
        return ()
    if variant in ("full-ft", "early-fusion"):
        return None
    if variant == "depth-gated":
        return (DEPTH_PREFIX, "gate.", "embed.")
    if variant == "depth-gated-rgb":
        return (DEPTH_PREFIX, "gate.")
    raise NavgateError(f"unknown variant {variant!r}")


def trainable_parameters(variant: str, store: ParameterStore) -> list[str]:
    """Canonical ordered list of trainable entries for a variant."""
    prefixes = trainable_prefixes(variant)
    if prefixes is None:
        return store.names()
    return [n for n in store.names() if n.startswith(prefixes)] if prefixes else []


def apply_trainability(variant: str, store: ParameterStore) -> None:
    wanted = set(trainable_parameters(variant, store))
    for name in store.names():
        store.set_trainable(name, name in wanted)


class Policy:
    """A policy variant: parameters, config, normalization, and samplers."""

    def __init__(self, store: ParameterStore, cfg: PolicyConfig,
                 normalizer: ActionNormalizer, variant: str):
        if variant not in VARIANTS:
            raise NavgateError(f"unknown variant {variant!r}")
        self.store = store
        self.cfg = cfg
        self.normalizer = normalizer
        self.variant = variant
        self.schedule = noise_schedule(cfg.diffusion_steps, cfg.schedule)

    # -- forward closures ---------------------------------------------------

    def _embed_window(self, windows: np.ndarray) -> Tensor:
        """4->3 channel embedding of an RGB-D window (gated RGB-D variant)."""
        w = matmul(self.store["embed.w"], Tensor(windows))
        return add(w, reshape(self.store["embed.b"], (3, 1)))

    def _early_fusion_tokens(self, windows: np.ndarray, goals: np.ndarray):
        from .policy.nets import encode_history, encode_observation
        cfg = self.cfg
        b = windows.shape[0]
        window_rgb = Tensor(np.ascontiguousarray(windows[:, :, :3]))
        depth = Tensor(np.ascontiguousarray(windows[:, :, 3]))      # (B, T+1, W)
        hist = encode_history(self.store, "", cfg, window_rgb)
        cur = Tensor(np.ascontiguousarray(windows[:, -1, :3]))
        obsgoal = encode_observation(self.store, "", cfg, cur, Tensor(goals))

        h = relu(linear(depth, self.store["efdepth.fc1.w"], self.store["efdepth.fc1.b"]))
        dtok = linear(h, self.store["efdepth.fc2.w"], self.store["efdepth.fc2.b"])  # (B,T+1,d)

        fused_hist = linear(concat([hist, dtok], axis=2),
                            self.store["effuse.w"], self.store["effuse.b"])
        cur_dtok = reshape(slice_(dtok, (slice(None), slice(cfg.frames - 1, cfg.frames))),
                           (b, cfg.embed_dim))
        fused_obsgoal = linear(concat([obsgoal, cur_dtok], axis=1),
                               self.store["effuse.w"], self.store["effuse.b"])
        return fused_hist, fused_obsgoal

    def context_of(self, windows: np.ndarray, goals: np.ndarray):
        """Variant-specific conditioning; returns what eps_closure needs."""
        cfg = self.cfg
        if self.variant in ("zero-shot", "full-ft"):
            rgb = Tensor(np.ascontiguousarray(windows[:, :, :3]))
            return {"c": compute_context(self.store, "", cfg, rgb, Tensor(goals))}
        if self.variant == "early-fusion":
            from .policy.nets import fuse_context
            hist, obsgoal = self._early_fusion_tokens(windows, goals)
            return {"c": fuse_context(self.store, "", cfg, hist, obsgoal)}
        # gated variants
        rgb = Tensor(np.ascontiguousarray(windows[:, :, :3]))
        goal_t = Tensor(goals)
        c = compute_context(self.store, "", cfg, rgb, goal_t)
        branch_in = rgb if self.variant == "depth-gated-rgb" else self._embed_window(windows)
        c_d = compute_context(self.store, DEPTH_PREFIX, cfg, branch_in, goal_t)
        c_gate = linear(c_d, self.store["gate.pre.w"], self.store["gate.pre.b"])
        return {"c": c, "c_gate": c_gate}

    def eps_closure(self, windows: np.ndarray, goals: np.ndarray):
        """Build an EpsModel over a fixed (window, goal) batch.

        windows: (B, T+1, 4, W) RGB-D float64; goals: (B, 3, W).
        """
        ctx = self.context_of(windows, goals)
        cfg = self.cfg
        if self.variant in GATED_VARIANTS:
            def eps_model(x: Tensor, k: np.ndarray) -> Tensor:
                _, u = unet_apply(self.store, DEPTH_PREFIX, cfg, x, k, ctx["c_gate"])
                inject = [
                    conv1d(u[i], self.store[f"gate.s{i + 1}.w"], self.store[f"gate.s{i + 1}.b"])
                    for i in range(cfg.stages)
                ]
                eps, _ = unet_apply(self.store, "", cfg, x, k, ctx["c"], inject=inject)
                return eps
        else:
            def eps_model(x: Tensor, k: np.ndarray) -> Tensor:
                eps, _ = unet_apply(self.store, "", cfg, x, k, ctx["c"])
                return eps
        return eps_model

    # -- training / inference -----------------------------------------------

    def loss(self, windows: np.ndarray, goals: np.ndarray, labels_norm: np.ndarray,
             rng: np.random.Generator) -> Tensor:
        return ddpm_train_loss(self.eps_closure(windows, goals), self.schedule,
                               labels_norm, rng)

    def sample(self, window: np.ndarray, goal: np.ndarray, rng: np.random.Generator,
               n_samples: int = 1) -> np.ndarray:
        """(T+1, 4, W) window + (3, W) goal -> (n, H+1, 2) waypoints in meters."""
        with no_grad():
            windows = np.repeat(window[None], n_samples, axis=0)
            goals = np.repeat(goal[None], n_samples, axis=0)
            eps_model = self.eps_closure(windows, goals)
            return ddpm_sample(eps_model, self.schedule, self.cfg, self.normalizer,
                               rng, n_samples)

    # -- persistence ----------------------------------------------------------

    def save(self, path) -> None:
        meta = {"variant": self.variant, "gates": GATE_PLACEMENT}
        self.cfg.to_meta(meta)
        self.normalizer.to_meta(meta)
        save_checkpoint(path, self.store, meta)

    @classmethod
    def load(cls, path) -> "Policy":
        store, meta = load_checkpoint(path)
        try:
            cfg = PolicyConfig.from_meta(meta)
            normalizer = ActionNormalizer.from_meta(meta)
            variant = meta["variant"]
        except KeyError as e:
            raise CheckpointError(f"{path}: missing metadata field {e}") from e
        return cls(store, cfg, normalizer, variant)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def init_base_policy(cfg: PolicyConfig, rng: np.random.Generator,
                     normalizer: ActionNormalizer) -> Policy:
    """Fresh randomly initialized policy (the pre-training starting point)."""
    store = ParameterStore()
    init_policy_params(store, cfg, rng)
    return Policy(store, cfg, normalizer, "full-ft")


def _check_base(checkpoint: Policy) -> None:
    if any(n.startswith((DEPTH_PREFIX, "gate.", "embed.", "ef")) for n in checkpoint.store.names()):
        raise CheckpointError("expected a plain pre-trained checkpoint, found adapter entries")


def init_zero_shot(checkpoint: Policy) -> Policy:
    _check_base(checkpoint)
    policy = Policy(checkpoint.store.clone(), checkpoint.cfg, checkpoint.normalizer, "zero-shot")
    apply_trainability("zero-shot", policy.store)
    return policy


def init_full_ft(checkpoint: Policy) -> Policy:
    _check_base(checkpoint)
    policy = Policy(checkpoint.store.clone(), checkpoint.cfg, checkpoint.normalizer, "full-ft")
    apply_trainability("full-ft", policy.store)
    return policy


def init_early_fusion(checkpoint: Policy, rng: np.random.Generator) -> Policy:
    """Random depth encoder; token projection passes RGB through at init."""
    _check_base(checkpoint)
    cfg = checkpoint.cfg
    store = checkpoint.store.clone()
    d = cfg.embed_dim
    w = cfg.rays
    scale = 1.0 / np.sqrt(w)
    store.add("efdepth.fc1.w", rng.standard_normal((w, 2 * d)) * scale)
    store.add("efdepth.fc1.b", np.zeros(2 * d))
    store.add("efdepth.fc2.w", rng.standard_normal((2 * d, d)) / np.sqrt(2 * d))
    store.add("efdepth.fc2.b", np.zeros(d))
    proj = np.vstack([np.eye(d), rng.standard_normal((d, d)) / np.sqrt(d)])
    store.add("effuse.w", proj)
    store.add("effuse.b", np.zeros(d))
    policy = Policy(store, cfg, checkpoint.normalizer, "early-fusion")
    apply_trainability("early-fusion", policy.store)
    return policy


def init_depth_gated(checkpoint: Policy, rgb_only: bool = False) -> Policy:
    """Frozen trunk + trainable copy + zero gates (+ 4->3 embed unless rgb_only).

    At construction: the copy is bit-identical to the trunk, every gate holds
    exact zeros, and the embedding passes RGB through with a zero depth
    column, so the forward equals the frozen trunk's forward bit for bit.
    """
    _check_base(checkpoint)
    cfg = checkpoint.cfg
    c1, c2, c3 = cfg.channels
    d = cfg.embed_dim
    store = checkpoint.store.clone()
    store.copy_with_prefix("", DEPTH_PREFIX, store, trainable=True)

    store.add("gate.pre.w", np.zeros((d, d)))
    store.add("gate.pre.b", np.zeros(d))
    for i, ch in enumerate((c1, c2, c3)):
        store.add(f"gate.s{i + 1}.w", np.zeros((ch, ch, 1)))
        store.add(f"gate.s{i + 1}.b", np.zeros(ch))
    if not rgb_only:
        embed = np.zeros((3, 4))
        embed[:, :3] = np.eye(3)
        store.add("embed.w", embed)
        store.add("embed.b", np.zeros(3))

    variant = "depth-gated-rgb" if rgb_only else "depth-gated"
    policy = Policy(store, cfg, checkpoint.normalizer, variant)
    apply_trainability(variant, policy.store)
    return policy


def build_variant(checkpoint: Policy, variant: str,
                  rng: np.random.Generator | None = None) -> Policy:
    if variant == "zero-shot":
        return init_zero_shot(checkpoint)
    if variant == "full-ft":
        return init_full_ft(checkpoint)
    if variant == "early-fusion":
        if rng is None:
            raise NavgateError("early-fusion init needs an rng")
        return init_early_fusion(checkpoint, rng)
    if variant == "depth-gated":
        return init_depth_gated(checkpoint, rgb_only=False)
    if variant == "depth-gated-rgb":
        return init_depth_gated(checkpoint, rgb_only=True)
    raise NavgateError(f"unknown variant {variant!r}")


def gated_forward_single(policy: Policy, window: np.ndarray, goal: np.ndarray,
                         noisy_hw2: np.ndarray, k: int):
    """Contract-level gated forward for one input.

    Returns the (H+1, 2) noise prediction and diagnostics with the per-stage
    injection norms (all exactly zero at initialization).
    """
    if policy.variant not in GATED_VARIANTS:
        raise NavgateError(f"gated forward needs a gated variant, got {policy.variant}")
    cfg = policy.cfg
    ctx = policy.context_of(window[None], goal[None])
    x = Tensor(np.asarray(noisy_hw2, dtype=np.float64).T[None])
    _, u = unet_apply(policy.store, DEPTH_PREFIX, cfg, x, np.array([k]), ctx["c_gate"])
    inject = [
        conv1d(u[i], policy.store[f"gate.s{i + 1}.w"], policy.store[f"gate.s{i + 1}.b"])
        for i in range(cfg.stages)
    ]
    eps, stages = unet_apply(policy.store, "", cfg, x, np.array([k]), ctx["c"], inject=inject)
    diagnostics = {
        "injection_norms": [float(np.linalg.norm(t.data)) for t in inject],
        "stage_shapes": [t.shape for t in stages],
    }
    return eps.data[0].T, diagnostics
