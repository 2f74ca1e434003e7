"""Policy architecture configuration."""

from __future__ import annotations

from dataclasses import dataclass, fields

from ..errors import ConfigError


@dataclass(frozen=True)
class PolicyConfig:
    history: int = 3          # past frames (window length = history + 1)
    horizon: int = 7          # future steps (outputs horizon + 1 waypoints)
    rays: int = 64            # observation strip width
    embed_dim: int = 64       # token / context width
    channels: tuple[int, int, int] = (64, 128, 64)   # down, mid, up widths
    diffusion_steps: int = 32
    schedule: str = "squared-cosine"

    def __post_init__(self):
        if self.history < 1 or self.horizon < 1:
            raise ConfigError("history and horizon must be >= 1")
        if self.diffusion_steps < 2:
            raise ConfigError("need at least 2 diffusion steps")
        if (self.horizon + 1) % 2 != 0:
            raise ConfigError("horizon + 1 must be divisible by the downsample factor 2")
        if self.embed_dim % 4 != 0:
            raise ConfigError("embed_dim must be divisible by the 4 attention heads")
        if len(self.channels) != 3:
            raise ConfigError("channels must list (down, mid, up) widths")

    @property
    def frames(self) -> int:
        return self.history + 1

    @property
    def length(self) -> int:
        return self.horizon + 1

    @property
    def stages(self) -> int:
        """Injection stages: one down block, one mid block, one up block."""
        return 3

    def to_meta(self, out: dict[str, str]) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            out["policy." + f.name] = ",".join(str(c) for c in v) if isinstance(v, tuple) else str(v)

    @classmethod
    def from_meta(cls, meta: dict[str, str]) -> "PolicyConfig":
        kw = {}
        for f in fields(cls):
            raw = meta["policy." + f.name]
            if f.name == "channels":
                kw[f.name] = tuple(int(c) for c in raw.split(","))
            elif f.name == "schedule":
                kw[f.name] = raw
            else:
                kw[f.name] = int(raw)
        return cls(**kw)
