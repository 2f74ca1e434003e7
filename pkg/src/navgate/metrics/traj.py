"""Trajectory error metrics: ADE, FDE, normalized DTW."""

from __future__ import annotations

import math

import numpy as np

from .. import kernels
from ..errors import ShapeMismatchError


def _as_points(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ShapeMismatchError(f"expected (N, 2) points, got {arr.shape}")
    return arr


def ade(pred, gt) -> float:
    """Mean Euclidean error over the horizon (meters)."""
    p, q = _as_points(pred), _as_points(gt)
    if p.shape != q.shape:
        raise ShapeMismatchError(f"length mismatch: {p.shape} vs {q.shape}")
    return float(np.mean(np.hypot(p[:, 0] - q[:, 0], p[:, 1] - q[:, 1])))


def fde(pred, gt) -> float:
    """Euclidean error at the terminal step (meters)."""
    p, q = _as_points(pred), _as_points(gt)
    if p.shape != q.shape:
        raise ShapeMismatchError(f"length mismatch: {p.shape} vs {q.shape}")
    return float(math.hypot(p[-1, 0] - q[-1, 0], p[-1, 1] - q[-1, 1]))


def dtw_norm(pred, gt, exponential: bool = False, threshold: float = 1.0) -> float:
    """DTW alignment cost (match/insert/delete moves, boundary matched),
    divided by the ground-truth point count. Lower is better.

    With exponential=True returns exp(-cost / (len(gt) * threshold)) instead,
    a [0, 1] similarity score (higher is better).
    """
    p, q = _as_points(pred), _as_points(gt)
    if len(p) == 0 or len(q) == 0:
        raise ShapeMismatchError("DTW needs non-empty sequences")
    cost = kernels.dtw_cost(p, q)
    if exponential:
        return float(math.exp(-cost / (len(q) * threshold)))
    return float(cost / len(q))


def endpoint_dispersion(trajectories: np.ndarray) -> tuple[float, float]:
    """Mean pairwise endpoint distance plus circular heading variance.

    trajectories: (n, H+1, 2); needs n >= 2.
    """
    t = np.asarray(trajectories, dtype=np.float64)
    if t.ndim != 3 or t.shape[0] < 2:
        raise ShapeMismatchError(f"need (n>=2, H+1, 2) trajectories, got {t.shape}")
    ends = t[:, -1, :]
    diff = ends[:, None, :] - ends[None, :, :]
    dists = np.hypot(diff[..., 0], diff[..., 1])
    n = len(ends)
    dispersion = float(dists[np.triu_indices(n, k=1)].mean())

    seg = t[:, -1, :] - t[:, -2, :]
    headings = np.arctan2(seg[:, 1], seg[:, 0])
    resultant = np.hypot(np.cos(headings).mean(), np.sin(headings).mean())
    return dispersion, float(1.0 - resultant)
