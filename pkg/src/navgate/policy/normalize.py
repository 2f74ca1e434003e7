"""Per-axis min/max normalization of waypoint labels to [-1, 1]."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateStatsError


class ActionNormalizer:
    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)
        if self.lo.shape != (2,) or self.hi.shape != (2,):
            raise DegenerateStatsError("stats must be per-axis (x, y)")
        if np.any(self.hi - self.lo < 1e-9):
            raise DegenerateStatsError(f"zero range in action stats: lo={self.lo}, hi={self.hi}")

    @classmethod
    def fit(cls, labels: np.ndarray) -> "ActionNormalizer":
        flat = labels.reshape(-1, 2)
        return cls(flat.min(axis=0), flat.max(axis=0))

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * (x - self.lo) / (self.hi - self.lo) - 1.0

    def denormalize(self, z: np.ndarray) -> np.ndarray:
        return (z + 1.0) * (self.hi - self.lo) / 2.0 + self.lo

    def to_meta(self, out: dict[str, str]) -> None:
        out["norm.x_lo"] = repr(float(self.lo[0]))
        out["norm.y_lo"] = repr(float(self.lo[1]))
        out["norm.x_hi"] = repr(float(self.hi[0]))
        out["norm.y_hi"] = repr(float(self.hi[1]))

    @classmethod
    def from_meta(cls, meta: dict[str, str]) -> "ActionNormalizer":
        return cls(
            [float(meta["norm.x_lo"]), float(meta["norm.y_lo"])],
            [float(meta["norm.x_hi"]), float(meta["norm.y_hi"])],
        )
