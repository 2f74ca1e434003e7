"""Procedural 2D worlds: obstacle lists, conservative grid rasterization,
and the scenario generators used for data collection and closed-loop evals.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import UnknownScenarioError

CELL_SIZE = 0.1
WALL_CLASS = 1
BOX_CLASS = 2
DISC_CLASS = 3

SCENARIOS = (
    "random-rooms",
    "basic-obstacle",
    "dynamic-corridor",
    "long-range",
    "single-obstacle",
    "multi-obstacle",
    "empty-corridor",
)


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.fmod(a + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.heading], dtype=np.float64)


@dataclass(frozen=True)
class Obstacle:
    kind: str                 # "box" | "disc"
    params: tuple             # box: (cx, cy, half_w, half_h); disc: (cx, cy, radius)
    class_id: int
    map_absent: bool = False  # physically present but excluded from goal-image capture

    def contains_margin(self, x: float, y: float, margin: float) -> bool:
        """True if the point is within `margin` of the shape."""
        if self.kind == "box":
            cx, cy, hw, hh = self.params
            dx = max(abs(x - cx) - hw, 0.0)
            dy = max(abs(y - cy) - hh, 0.0)
            return dx * dx + dy * dy <= margin * margin
        cx, cy, r = self.params
        dx, dy = x - cx, y - cy
        return math.hypot(dx, dy) <= r + margin


@dataclass
class WorldMap:
    width: float
    height: float
    cell_size: float
    obstacles: list[Obstacle]
    scenario: str
    seed: int
    start: tuple[float, float] | None = None
    goal: tuple[float, float] | None = None
    grid: np.ndarray = field(init=False)

    def __post_init__(self):
        self.grid = rasterize(self.obstacles, self.width, self.height, self.cell_size)

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape

    def in_bounds(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height

    def occupancy(self) -> np.ndarray:
        return self.grid != 0

    def without_map_absent(self) -> "WorldMap":
        kept = [o for o in self.obstacles if not o.map_absent]
        return replace(self, obstacles=kept)

    def collides(self, x: float, y: float, radius: float) -> bool:
        """Exact-geometry disc-vs-obstacle test (independent of the grid)."""
        for obs in self.obstacles:
            if obs.contains_margin(x, y, radius):
                return True
        return False


def boundary_obstacles(width: float, height: float, cell: float) -> list[Obstacle]:
    t = cell / 2.0
    return [
        Obstacle("box", (width / 2, t, width / 2, t), WALL_CLASS),
        Obstacle("box", (width / 2, height - t, width / 2, t), WALL_CLASS),
        Obstacle("box", (t, height / 2, t, height / 2), WALL_CLASS),
        Obstacle("box", (width - t, height / 2, t, height / 2), WALL_CLASS),
    ]


def rasterize(obstacles: list[Obstacle], width: float, height: float, cell: float) -> np.ndarray:
    """Conservative rasterization: a cell is occupied iff it intersects a shape.

    Obstacles paint their class id in list order (later entries overwrite).
    """
    nx = int(round(width / cell))
    ny = int(round(height / cell))
    grid = np.zeros((nx, ny), dtype=np.int32)
    xs_lo = np.arange(nx) * cell
    ys_lo = np.arange(ny) * cell
    for obs in obstacles:
        if obs.kind == "box":
            cx, cy, hw, hh = obs.params
            mask_x = (xs_lo < cx + hw) & (xs_lo + cell > cx - hw)
            mask_y = (ys_lo < cy + hh) & (ys_lo + cell > cy - hh)
            grid[np.ix_(mask_x, mask_y)] = obs.class_id
        else:
            cx, cy, r = obs.params
            # distance from disc center to each cell rectangle
            qx = np.clip(cx, xs_lo, xs_lo + cell)[:, None]
            qy = np.clip(cy, ys_lo, ys_lo + cell)[None, :]
            d2 = (qx - cx) ** 2 + (qy - cy) ** 2
            grid[d2 <= r * r] = obs.class_id
    return grid


# ---------------------------------------------------------------------------
# scenario generators
# ---------------------------------------------------------------------------

def _corridor(width, height, obstacles, scenario, seed, start_x=1.0, goal_margin=1.0):
    obs = boundary_obstacles(width, height, CELL_SIZE) + obstacles
    return WorldMap(width, height, CELL_SIZE, obs, scenario, seed,
                    start=(start_x, height / 2), goal=(width - goal_margin, height / 2))


def _gen_random_rooms(rng: np.random.Generator, seed: int) -> WorldMap:
    width, height = 9.0, 9.0
    obstacles = boundary_obstacles(width, height, CELL_SIZE)
    count = int(rng.integers(4, 8))
    for _ in range(count):
        cx = float(rng.uniform(1.2, width - 1.2))
        cy = float(rng.uniform(1.2, height - 1.2))
        if rng.random() < 0.5:
            hw = float(rng.uniform(0.25, 0.7))
            hh = float(rng.uniform(0.25, 0.7))
            obstacles.append(Obstacle("box", (cx, cy, hw, hh), BOX_CLASS))
        else:
            r = float(rng.uniform(0.25, 0.55))
            obstacles.append(Obstacle("disc", (cx, cy, r), DISC_CLASS))
    return WorldMap(width, height, CELL_SIZE, obstacles, "random-rooms", seed)


def _gen_basic_obstacle(rng, seed):
    off = float(rng.uniform(-0.5, 0.5))
    jx = float(rng.uniform(-0.8, 0.8))
    box = Obstacle("box", (5.0 + jx, 1.5 + off, 0.35, 0.35), BOX_CLASS)
    return _corridor(10.0, 3.0, [box], "basic-obstacle", seed)


def _gen_single_obstacle(rng, seed):
    off = float(rng.uniform(-0.35, 0.35))
    jx = float(rng.uniform(-0.8, 0.8))
    disc = Obstacle("disc", (5.0 + jx, 1.5 + off, 0.35), DISC_CLASS)
    return _corridor(10.0, 3.0, [disc], "single-obstacle", seed)


def _gen_empty_corridor(rng, seed):
    return _corridor(10.0, 3.0, [], "empty-corridor", seed)


def _gen_dynamic_corridor(rng, seed):
    off = float(rng.uniform(-0.2, 0.2))
    chair = Obstacle("disc", (8.0, 1.5 + off, 0.35), DISC_CLASS, map_absent=True)
    return _corridor(12.0, 3.0, [chair], "dynamic-corridor", seed)


def _gen_multi_obstacle(rng, seed):
    width, height = 15.0, 5.0
    first_sign = 1.0 if rng.random() < 0.5 else -1.0
    obstacles = []
    for i in range(3):
        x = 3.75 * (i + 1) + float(rng.uniform(-0.4, 0.4))
        sign = first_sign * (1.0 if i % 2 == 0 else -1.0)
        lateral = sign * float(rng.uniform(0.6, 0.9))
        obstacles.append(Obstacle("disc", (x, height / 2 + lateral, 0.35), DISC_CLASS))
    return _corridor(width, height, obstacles, "multi-obstacle", seed, goal_margin=1.0)


def _gen_long_range(rng, seed):
    # S-shaped route: two interior walls create two junctions
    width, height = 14.0, 9.0
    walls = [
        Obstacle("box", (4.5, 3.0, 0.15, 3.0), WALL_CLASS),
        Obstacle("box", (9.5, 6.0, 0.15, 3.0), WALL_CLASS),
    ]
    extra = []
    for _ in range(int(rng.integers(1, 3))):
        cx = float(rng.uniform(6.0, 8.5))
        cy = float(rng.uniform(1.5, 7.5))
        extra.append(Obstacle("disc", (cx, cy, 0.3), DISC_CLASS))
    obs = boundary_obstacles(width, height, CELL_SIZE) + walls + extra
    return WorldMap(width, height, CELL_SIZE, obs, "long-range", seed,
                    start=(1.0, 1.0), goal=(width - 1.0, height - 1.0))


_GENERATORS = {
    "random-rooms": _gen_random_rooms,
    "basic-obstacle": _gen_basic_obstacle,
    "dynamic-corridor": _gen_dynamic_corridor,
    "long-range": _gen_long_range,
    "single-obstacle": _gen_single_obstacle,
    "multi-obstacle": _gen_multi_obstacle,
    "empty-corridor": _gen_empty_corridor,
}


def generate_world(seed: int, scenario: str) -> WorldMap:
    """Deterministic world per (seed, scenario)."""
    try:
        gen = _GENERATORS[scenario]
    except KeyError:
        raise UnknownScenarioError(
            f"unknown scenario {scenario!r}; expected one of {SCENARIOS}") from None
    tag = zlib.crc32(scenario.encode("utf-8"))
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5EED, tag)))
    return gen(rng, seed)
