"""Flat key=value experiment configs.

Every key is required: a config file is a complete, hashable record of an
experiment. Unknown or missing keys are errors. The config hash (sha256 of
the normalized key=value lines) is stamped into every output.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigError
from ..policy.config import PolicyConfig
from ..sim.camera import PALETTES, PROJECTIONS
from ..sim.dataset import DomainSpec
from ..sim.camera import CameraSpec


@dataclass(frozen=True)
class TrainSettings:
    pretrain_epochs: int
    finetune_epochs: int
    batch_size: int
    base_lr: float
    warmup_frac: float
    weight_decay: float


@dataclass(frozen=True)
class EvalSettings:
    offline_trials: int
    rollout_trials: int
    rollout_max_steps: int
    diversity_samples: int
    diversity_contexts: int


@dataclass(frozen=True)
class ExperimentConfig:
    data_a: DomainSpec
    data_b: DomainSpec
    data_a_eval: DomainSpec
    policy: PolicyConfig
    train: TrainSettings
    eval: EvalSettings
    master_seed: int
    out_root: str
    config_hash: str

    def run_dir(self, seed: int | None = None) -> Path:
        s = self.master_seed if seed is None else seed
        return Path(self.out_root) / f"{self.config_hash}-s{s}"


_DOMAIN_KEYS = ("scenarios", "episodes", "fov_deg", "rays", "max_range",
                "projection", "depth_noise", "palette")
_TRAIN_KEYS = ("pretrain_epochs", "finetune_epochs", "batch_size", "base_lr",
               "warmup_frac", "weight_decay")
_EVAL_KEYS = ("offline_trials", "rollout_trials", "rollout_max_steps",
              "diversity_samples", "diversity_contexts")
_POLICY_KEYS = ("history", "horizon", "rays", "embed_dim", "channels",
                "diffusion_steps", "schedule")


def required_keys() -> set[str]:
    keys = {"seed.master", "out.root"}
    for dom in ("data_a", "data_b", "data_a_eval"):
        keys |= {f"{dom}.{k}" for k in _DOMAIN_KEYS}
    keys |= {f"train.{k}" for k in _TRAIN_KEYS}
    keys |= {f"eval.{k}" for k in _EVAL_KEYS}
    keys |= {f"policy.{k}" for k in _POLICY_KEYS}
    return keys


def parse_pairs(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value.strip()
    return pairs


def config_hash_of(pairs: dict[str, str]) -> str:
    canon = "\n".join(f"{k} = {pairs[k]}" for k in sorted(pairs))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def _domain(pairs: dict[str, str], name: str, horizon: int) -> DomainSpec:
    get = lambda k: pairs[f"{name}.{k}"]
    projection = get("projection")
    if projection not in PROJECTIONS:
        raise ConfigError(f"{name}.projection: unknown projection {projection!r}")
    palette = get("palette")
    if palette not in PALETTES:
        raise ConfigError(f"{name}.palette: unknown palette {palette!r}")
    camera = CameraSpec(
        fov_deg=float(get("fov_deg")),
        rays=int(get("rays")),
        max_range=float(get("max_range")),
        projection=projection,
        depth_noise=float(get("depth_noise")),
    )
    return DomainSpec(
        name=name.replace("data_", "").replace("_", "-"),
        scenarios=tuple(s.strip() for s in get("scenarios").split(",") if s.strip()),
        episodes=int(get("episodes")),
        camera=camera,
        palette=palette,
        horizon=horizon,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    pairs = parse_pairs(text)
    missing = required_keys() - set(pairs)
    if missing:
        raise ConfigError(f"{path}: missing keys: {', '.join(sorted(missing))}")
    unknown = set(pairs) - required_keys()
    if unknown:
        raise ConfigError(f"{path}: unknown keys: {', '.join(sorted(unknown))}")

    policy = PolicyConfig(
        history=int(pairs["policy.history"]),
        horizon=int(pairs["policy.horizon"]),
        rays=int(pairs["policy.rays"]),
        embed_dim=int(pairs["policy.embed_dim"]),
        channels=tuple(int(c) for c in pairs["policy.channels"].split(",")),
        diffusion_steps=int(pairs["policy.diffusion_steps"]),
        schedule=pairs["policy.schedule"],
    )
    for dom in ("data_a", "data_b", "data_a_eval"):
        if int(pairs[f"{dom}.rays"]) != policy.rays:
            raise ConfigError(f"{dom}.rays must equal policy.rays")

    return ExperimentConfig(
        data_a=_domain(pairs, "data_a", policy.horizon),
        data_b=_domain(pairs, "data_b", policy.horizon),
        data_a_eval=_domain(pairs, "data_a_eval", policy.horizon),
        policy=policy,
        train=TrainSettings(
            pretrain_epochs=int(pairs["train.pretrain_epochs"]),
            finetune_epochs=int(pairs["train.finetune_epochs"]),
            batch_size=int(pairs["train.batch_size"]),
            base_lr=float(pairs["train.base_lr"]),
            warmup_frac=float(pairs["train.warmup_frac"]),
            weight_decay=float(pairs["train.weight_decay"]),
        ),
        eval=EvalSettings(
            offline_trials=int(pairs["eval.offline_trials"]),
            rollout_trials=int(pairs["eval.rollout_trials"]),
            rollout_max_steps=int(pairs["eval.rollout_max_steps"]),
            diversity_samples=int(pairs["eval.diversity_samples"]),
            diversity_contexts=int(pairs["eval.diversity_contexts"]),
        ),
        master_seed=int(pairs["seed.master"]),
        out_root=pairs["out.root"],
        config_hash=config_hash_of(pairs),
    )
