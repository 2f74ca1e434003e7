"""Grid shortest-path expert: plan, shortcut, resample, label waypoints."""

from __future__ import annotations

import heapq
import math

import numpy as np
from scipy import ndimage

from ..errors import NavgateError, NoPathError
from .world import Pose, WorldMap, wrap_angle

ROBOT_RADIUS = 0.25
GOAL_TOLERANCE = 0.3
RESAMPLE_STEP = 0.25

_SQRT2 = math.sqrt(2.0)
_MOVES = ((1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
          (1, 1, _SQRT2), (1, -1, _SQRT2), (-1, 1, _SQRT2), (-1, -1, _SQRT2))


def inflate_occupancy(occ: np.ndarray, radius_m: float, cell: float) -> np.ndarray:
    """Dilate occupied cells by the robot radius plus one cell diagonal.

    The extra diagonal keeps grid-planned paths clear of the exact shapes,
    not just of occupied cell centers.
    """
    r_cells = (radius_m + cell * _SQRT2) / cell
    n = int(math.ceil(r_cells))
    yy, xx = np.mgrid[-n:n + 1, -n:n + 1]
    disc = (xx * xx + yy * yy) <= r_cells * r_cells
    return ndimage.binary_dilation(occ, structure=disc)


def grid_shortest_path(blocked: np.ndarray, start: tuple[int, int],
                       goal: tuple[int, int]) -> list[tuple[int, int]]:
    """8-connected A* with octile heuristic; diagonal moves may not cut corners."""
    nx, ny = blocked.shape
    if blocked[start] or blocked[goal]:
        raise NoPathError(f"start {start} or goal {goal} blocked")

    def heuristic(c):
        dx, dy = abs(c[0] - goal[0]), abs(c[1] - goal[1])
        return (dx + dy) + (_SQRT2 - 2.0) * min(dx, dy)

    best: dict[tuple[int, int], float] = {start: 0.0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    heap = [(heuristic(start), 0.0, start)]
    while heap:
        f, g, cur = heapq.heappop(heap)
        if cur == goal:
            path = [cur]
            while cur in parent:
                cur = parent[cur]
                path.append(cur)
            return path[::-1]
        if g > best.get(cur, math.inf):
            continue
        cx, cy = cur
        for dx, dy, cost in _MOVES:
            mx, my = cx + dx, cy + dy
            if not (0 <= mx < nx and 0 <= my < ny) or blocked[mx, my]:
                continue
            if dx and dy and (blocked[cx + dx, cy] or blocked[cx, cy + dy]):
                continue
            ng = g + cost
            nxt = (mx, my)
            if ng < best.get(nxt, math.inf) - 1e-12:
                best[nxt] = ng
                parent[nxt] = cur
                heapq.heappush(heap, (ng + heuristic(nxt), ng, nxt))
    raise NoPathError(f"no path from {start} to {goal}")


def _cell_of(x: float, y: float, cell: float) -> tuple[int, int]:
    return int(x / cell), int(y / cell)


def _line_free(blocked: np.ndarray, p: np.ndarray, q: np.ndarray, cell: float) -> bool:
    dist = float(np.hypot(*(q - p)))
    steps = max(2, int(dist / (cell * 0.5)) + 1)
    for s in np.linspace(0.0, 1.0, steps):
        x, y = p + s * (q - p)
        ix, iy = _cell_of(x, y, cell)
        if blocked[ix, iy]:
            return False
    return True


def _shortcut(points: np.ndarray, blocked: np.ndarray, cell: float) -> np.ndarray:
    keep = [0]
    i = 0
    while i < len(points) - 1:
        j = len(points) - 1
        while j > i + 1 and not _line_free(blocked, points[i], points[j], cell):
            j -= 1
        keep.append(j)
        i = j
    return points[keep]


def _resample(points: np.ndarray, step: float) -> np.ndarray:
    seg = np.diff(points, axis=0)
    lens = np.hypot(seg[:, 0], seg[:, 1])
    total = float(lens.sum())
    if total == 0.0:
        return points[:1]
    arcs = np.concatenate([[0.0], np.cumsum(lens)])
    n = max(2, int(math.ceil(total / step)) + 1)
    targets = np.linspace(0.0, total, n)
    out = np.empty((n, 2))
    out[:, 0] = np.interp(targets, arcs, points[:, 0])
    out[:, 1] = np.interp(targets, arcs, points[:, 1])
    return out


def _headings(points: np.ndarray) -> np.ndarray:
    seg = np.diff(points, axis=0)
    h = np.arctan2(seg[:, 1], seg[:, 0])
    return np.concatenate([h, h[-1:]]) if len(h) else np.zeros(1)


def plan_expert(world: WorldMap, start: Pose, goal: Pose) -> np.ndarray:
    """Collision-free (N, 3) pose path from start to goal.

    Shortest path on the inflated grid, shortcut-smoothed, resampled at a
    fixed arc-length step with tangent headings. Raises NoPathError when the
    endpoints are disconnected.
    """
    cell = world.cell_size
    blocked = inflate_occupancy(world.occupancy(), ROBOT_RADIUS, cell)
    s = _cell_of(start.x, start.y, cell)
    g = _cell_of(goal.x, goal.y, cell)
    cells = grid_shortest_path(blocked, s, g)
    pts = (np.array(cells, dtype=np.float64) + 0.5) * cell
    pts[0] = (start.x, start.y)
    pts[-1] = (goal.x, goal.y)
    pts = _shortcut(pts, blocked, cell)
    pts = _resample(pts, RESAMPLE_STEP)

    # one light corner-rounding pass, rolled back if it grazes the margin
    if len(pts) > 2:
        smooth = pts.copy()
        smooth[1:-1] = 0.25 * pts[:-2] + 0.5 * pts[1:-1] + 0.25 * pts[2:]
        ok = all(not blocked[_cell_of(x, y, cell)] for x, y in smooth)
        if ok:
            pts = _resample(smooth, RESAMPLE_STEP)

    return np.column_stack([pts, _headings(pts)])


def label_waypoints(path: np.ndarray, index: int, horizon: int) -> np.ndarray:
    """(H+1, 2) future positions in the frame of path[index].

    Indices past the end repeat the terminal pose. Waypoint 0 is always the
    origin of its own frame.
    """
    if len(path) == 0:
        raise NavgateError("empty path")
    n = len(path)
    px, py, heading = path[index]
    c, s = math.cos(-heading), math.sin(-heading)
    rot = np.array([[c, -s], [s, c]])
    idx = np.minimum(np.arange(index, index + horizon + 1), n - 1)
    rel = path[idx, :2] - (px, py)
    return rel @ rot.T


def pose_at(path: np.ndarray, index: int) -> Pose:
    x, y, h = path[min(index, len(path) - 1)]
    return Pose(float(x), float(y), float(h))


def path_length(path: np.ndarray) -> float:
    seg = np.diff(path[:, :2], axis=0)
    return float(np.hypot(seg[:, 0], seg[:, 1]).sum())


def reaches_goal(path: np.ndarray, goal: Pose, tol: float = GOAL_TOLERANCE) -> bool:
    return bool(np.hypot(path[-1, 0] - goal.x, path[-1, 1] - goal.y) <= tol)
