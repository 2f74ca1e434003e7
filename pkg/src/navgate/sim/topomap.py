"""Topological goal maps: ordered goal images captured along a route."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import CameraSpec, raycast_observe
from .expert import pose_at
from .world import WorldMap


@dataclass
class TopoMap:
    images: np.ndarray      # (M, 3, W)
    poses: np.ndarray       # (M, 3) capture poses
    spacing: float

    def __len__(self) -> int:
        return len(self.poses)


def capture_goal_images(world: WorldMap, route: np.ndarray, spacing: float,
                        camera: CameraSpec, palette: str) -> TopoMap:
    """Render goal images every `spacing` meters along the route (both
    endpoints included). Map-absent obstacles are stripped before rendering,
    so anything flagged map_absent never appears in the captures.
    """
    if len(route) == 0:
        raise ValueError("route is empty")
    if spacing <= 0.0:
        raise ValueError("spacing must be positive")
    snapshot = world.without_map_absent()

    seg = np.diff(route[:, :2], axis=0)
    arcs = np.concatenate([[0.0], np.cumsum(np.hypot(seg[:, 0], seg[:, 1]))])
    total = float(arcs[-1])
    marks = list(np.arange(0.0, total, spacing)) + [total]

    indices = sorted({int(np.searchsorted(arcs, m)) for m in marks})
    indices = [min(i, len(route) - 1) for i in indices]

    images = []
    poses = []
    for i in indices:
        obs = raycast_observe(snapshot, pose_at(route, i), camera, rng=None, palette=palette)
        images.append(obs.color)
        poses.append(route[i])
    return TopoMap(images=np.stack(images), poses=np.stack(poses), spacing=spacing)
