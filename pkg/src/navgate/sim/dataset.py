"""Episode generation and the NAVSET on-disk dataset format.

A NAVSET directory holds a textual `manifest` and a `data.bin` of
little-endian float32, one episode after another:

    poses [N x 3] | observations [N x 4 x W] | labels [N x (H+1) x 2]
    | goal image [3 x W] | goal pose [3]

The manifest records the domain spec, camera, per-episode seeds and float
offsets. Generation is a pure function of (spec, seed): rerunning produces
byte-identical files.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DatasetError, NoPathError
from . import expert
from .camera import CameraSpec, raycast_observe
from .world import Pose, WorldMap, generate_world

FORMAT = "navset v1"


def derive_seed(master: int, *parts) -> int:
    """Stable 63-bit stream seed from a master seed and a tag path."""
    text = f"{master}/" + "/".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1


@dataclass(frozen=True)
class DomainSpec:
    name: str
    scenarios: tuple[str, ...]
    episodes: int
    camera: CameraSpec
    palette: str
    horizon: int = 7

    def describe(self) -> list[str]:
        cam = self.camera
        return [
            f"domain {self.name}",
            f"scenarios {','.join(self.scenarios)}",
            f"episodes {self.episodes}",
            f"camera {cam.fov_deg} {cam.rays} {cam.max_range} {cam.projection} {cam.depth_noise}",
            f"palette {self.palette}",
            f"horizon {self.horizon}",
        ]


@dataclass
class EpisodeData:
    poses: np.ndarray         # (N, 3)
    observations: np.ndarray  # (N, 4, W)
    labels: np.ndarray        # (N, H+1, 2)
    goal_image: np.ndarray    # (3, W)
    goal_pose: np.ndarray     # (3,)
    seed: int
    world: WorldMap | None = None


def _sample_free_pose(world: WorldMap, blocked: np.ndarray, rng: np.random.Generator) -> Pose:
    cell = world.cell_size
    free = np.argwhere(~blocked)
    pick = free[rng.integers(0, len(free))]
    x = (pick[0] + 0.5) * cell
    y = (pick[1] + 0.5) * cell
    return Pose(float(x), float(y), float(rng.uniform(-np.pi, np.pi)))


def _episode_endpoints(world: WorldMap, rng: np.random.Generator) -> tuple[Pose, Pose]:
    if world.start is not None and world.goal is not None:
        sx, sy = world.start
        gx, gy = world.goal
        start = Pose(sx, sy + float(rng.uniform(-0.3, 0.3)), 0.0)
        goal = Pose(gx, gy + float(rng.uniform(-0.3, 0.3)), 0.0)
        return start, goal
    blocked = expert.inflate_occupancy(world.occupancy(), expert.ROBOT_RADIUS, world.cell_size)
    for _ in range(50):
        start = _sample_free_pose(world, blocked, rng)
        goal = _sample_free_pose(world, blocked, rng)
        if np.hypot(goal.x - start.x, goal.y - start.y) >= 3.0:
            return start, goal
    raise DatasetError(f"could not sample endpoints in world seed={world.seed}")


def generate_episode(scenario: str, camera: CameraSpec, palette: str,
                     seed: int, horizon: int, keep_world: bool = False) -> EpisodeData:
    """One expert-demonstrated episode; deterministic per seed."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xE9)))
    for attempt in range(8):
        world = generate_world(seed + attempt * 1_000_003, scenario)
        try:
            start, goal = _episode_endpoints(world, rng)
            path = expert.plan_expert(world, start, goal)
            break
        except (NoPathError, DatasetError):
            continue
    else:
        raise DatasetError(f"no plannable world for scenario={scenario} seed={seed}")

    n = len(path)
    w = camera.rays
    obs = np.empty((n, 4, w), dtype=np.float64)
    labels = np.empty((n, horizon + 1, 2), dtype=np.float64)
    for i in range(n):
        frame = raycast_observe(world, expert.pose_at(path, i), camera, rng, palette)
        obs[i] = frame.rgbd()
        labels[i] = expert.label_waypoints(path, i, horizon)
    goal_obs = raycast_observe(world, expert.pose_at(path, n - 1), camera, rng, palette)
    return EpisodeData(
        poses=path,
        observations=obs,
        labels=labels,
        goal_image=goal_obs.color,
        goal_pose=path[-1].copy(),
        seed=seed,
        world=world if keep_world else None,
    )


def generate_dataset(out_dir: str | os.PathLike, spec: DomainSpec, seed: int) -> Path:
    """Write a NAVSET directory for the domain spec; byte-identical per seed."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_lines = [FORMAT] + spec.describe() + [f"seed {seed}"]

    offset = 0
    blobs = []
    for ep in range(spec.episodes):
        scenario = spec.scenarios[ep % len(spec.scenarios)]
        ep_seed = derive_seed(seed, "episode", spec.name, ep)
        episode = generate_episode(scenario, spec.camera, spec.palette, ep_seed, spec.horizon)
        chunk = episode_floats(episode)
        blobs.append(chunk.astype("<f4").tobytes())
        manifest_lines.append(
            f"episode {ep} {ep_seed} {len(episode.poses)} {offset} {scenario}")
        offset += chunk.size

    with open(out / "data.bin", "wb") as f:
        for b in blobs:
            f.write(b)
    (out / "manifest").write_text("\n".join(manifest_lines) + "\n", encoding="utf-8")
    return out


def episode_floats(ep: EpisodeData) -> np.ndarray:
    return np.concatenate([
        ep.poses.ravel(), ep.observations.ravel(), ep.labels.ravel(),
        ep.goal_image.ravel(), ep.goal_pose.ravel()])


class NavsetReader:
    """Loads a NAVSET directory; episodes decode lazily from the float blob."""

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        manifest = (self.path / "manifest").read_text(encoding="utf-8").splitlines()
        if not manifest or manifest[0] != FORMAT:
            raise DatasetError(f"{path}: not a NAVSET directory")
        self.meta: dict[str, str] = {}
        self.episodes: list[tuple[int, int, int, str]] = []  # seed, steps, offset, scenario
        for line in manifest[1:]:
            kind, _, rest = line.partition(" ")
            if kind == "episode":
                idx, ep_seed, steps, off, scenario = rest.split(" ")
                self.episodes.append((int(ep_seed), int(steps), int(off), scenario))
            else:
                self.meta[kind] = rest
        cam = self.meta["camera"].split(" ")
        self.camera = CameraSpec(float(cam[0]), int(cam[1]), float(cam[2]), cam[3], float(cam[4]))
        self.horizon = int(self.meta["horizon"])
        self.palette = self.meta["palette"]
        self.blob = np.fromfile(self.path / "data.bin", dtype="<f4")

    def __len__(self) -> int:
        return len(self.episodes)

    def episode_steps(self, i: int) -> int:
        return self.episodes[i][1]

    def episode(self, i: int) -> EpisodeData:
        ep_seed, n, off, _scenario = self.episodes[i]
        w = self.camera.rays
        h1 = self.horizon + 1
        sizes = [n * 3, n * 4 * w, n * h1 * 2, 3 * w, 3]
        parts = []
        cursor = off
        for s in sizes:
            parts.append(self.blob[cursor:cursor + s].astype(np.float64))
            cursor += s
        return EpisodeData(
            poses=parts[0].reshape(n, 3),
            observations=parts[1].reshape(n, 4, w),
            labels=parts[2].reshape(n, h1, 2),
            goal_image=parts[3].reshape(3, w),
            goal_pose=parts[4],
            seed=ep_seed,
        )

    def window_index(self) -> list[tuple[int, int]]:
        """All (episode, step) pairs; each is one training example."""
        return [(e, t) for e in range(len(self)) for t in range(self.episode_steps(e))]

    def label_stats(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-axis min/max over every label waypoint in the dataset."""
        lo = np.full(2, np.inf)
        hi = np.full(2, -np.inf)
        for e in range(len(self)):
            labels = self.episode(e).labels.reshape(-1, 2)
            lo = np.minimum(lo, labels.min(axis=0))
            hi = np.maximum(hi, labels.max(axis=0))
        return lo, hi
