"""Expert planner: optimality oracles, labels, frame algebra."""

import itertools
import math

import numpy as np
import pytest

from navgate.errors import NoPathError
from navgate.sim import (
    GOAL_TOLERANCE, Pose, generate_world, grid_shortest_path, label_waypoints, plan_expert,
)
from navgate.sim.expert import path_length
from navgate.sim.world import CELL_SIZE, WorldMap, boundary_obstacles


def corridor_world():
    return WorldMap(10.0, 3.0, CELL_SIZE, boundary_obstacles(10.0, 3.0, CELL_SIZE), "corr", 0)


def brute_force_shortest(blocked, start, goal):
    """Exhaustive DFS over simple paths; tiny grids only."""
    nx, ny = blocked.shape
    best = [math.inf]

    def visit(cell, cost, seen):
        if cost >= best[0]:
            return
        if cell == goal:
            best[0] = cost
            return
        cx, cy = cell
        for dx, dy in itertools.product((-1, 0, 1), repeat=2):
            if dx == 0 and dy == 0:
                continue
            mx, my = cx + dx, cy + dy
            nxt = (mx, my)
            if not (0 <= mx < nx and 0 <= my < ny) or blocked[mx, my] or nxt in seen:
                continue
            if dx and dy and (blocked[cx + dx, cy] or blocked[cx, cy + dy]):
                continue
            visit(nxt, cost + math.hypot(dx, dy), seen | {nxt})

    visit(start, 0.0, {start})
    return best[0]


def astar_cost(cells):
    pts = np.array(cells, dtype=float)
    return float(np.hypot(*np.diff(pts, axis=0).T).sum())


def test_free_corridor_near_euclidean():
    world = corridor_world()
    start, goal = Pose(1.0, 1.5, 0.0), Pose(9.0, 1.5, 0.0)
    path = plan_expert(world, start, goal)
    euclid = math.hypot(goal.x - start.x, goal.y - start.y)
    assert path_length(path) <= euclid * 1.05
    assert np.hypot(path[-1, 0] - goal.x, path[-1, 1] - goal.y) <= GOAL_TOLERANCE


@pytest.mark.parametrize("blocked_cell", [(1, 1), (0, 1), (2, 1)])
def test_three_by_three_matches_brute_force(blocked_cell):
    blocked = np.zeros((3, 3), dtype=bool)
    blocked[blocked_cell] = True
    start, goal = (0, 0), (2, 2)
    cells = grid_shortest_path(blocked, start, goal)
    assert astar_cost(cells) == pytest.approx(brute_force_shortest(blocked, start, goal))


def test_larger_grid_matches_brute_force():
    rng = np.random.default_rng(8)
    for _ in range(5):
        blocked = rng.random((4, 4)) < 0.25
        blocked[0, 0] = blocked[3, 3] = False
        try:
            cells = grid_shortest_path(blocked, (0, 0), (3, 3))
        except NoPathError:
            assert brute_force_shortest(blocked, (0, 0), (3, 3)) == math.inf
            continue
        assert astar_cost(cells) == pytest.approx(brute_force_shortest(blocked, (0, 0), (3, 3)))


def test_walled_off_goal_raises():
    world = generate_world(0, "basic-obstacle")
    with pytest.raises(NoPathError):
        # goal buried inside the obstacle region
        box = [o for o in world.obstacles if o.class_id == 2][0]
        plan_expert(world, Pose(1.0, 1.5, 0.0), Pose(box.params[0], box.params[1], 0.0))


def test_expert_path_clears_obstacles():
    for seed in range(4):
        world = generate_world(seed, "multi-obstacle")
        path = plan_expert(world, Pose(*world.start, 0.0), Pose(*world.goal, 0.0))
        for x, y, _ in path:
            assert not world.collides(x, y, 0.25)


# ---------------------------------------------------------------------------
# waypoint labels
# ---------------------------------------------------------------------------

def rigid_transform_oracle(path, index, horizon):
    out = np.zeros((horizon + 1, 2))
    px, py, th = path[index]
    for j in range(horizon + 1):
        q = path[min(index + j, len(path) - 1)]
        dx, dy = q[0] - px, q[1] - py
        out[j, 0] = math.cos(th) * dx + math.sin(th) * dy
        out[j, 1] = -math.sin(th) * dx + math.cos(th) * dy
    return out


def test_waypoint_zero_is_origin():
    rng = np.random.default_rng(1)
    path = np.column_stack([rng.uniform(0, 5, 12), rng.uniform(0, 5, 12), rng.uniform(-3, 3, 12)])
    for i in range(len(path)):
        assert np.array_equal(label_waypoints(path, i, 7)[0], [0.0, 0.0])


def test_straight_path_labels():
    n = 20
    path = np.column_stack([np.arange(n) * 0.5, np.zeros(n), np.zeros(n)])
    labels = label_waypoints(path, 0, 7)
    assert np.allclose(labels[:, 0], np.arange(8) * 0.5)
    assert np.allclose(labels[:, 1], 0.0)


def test_labels_match_rigid_transform_oracle():
    rng = np.random.default_rng(2)
    path = np.column_stack([
        np.cumsum(rng.uniform(0.1, 0.4, 15)),
        np.cumsum(rng.uniform(-0.3, 0.3, 15)),
        rng.uniform(-np.pi, np.pi, 15),
    ])
    for i in (0, 3, 9, 14):
        got = label_waypoints(path, i, 7)
        assert np.allclose(got, rigid_transform_oracle(path, i, 7), atol=1e-12)


def test_inverse_transform_recovers_world_points():
    rng = np.random.default_rng(3)
    path = np.column_stack([rng.uniform(0, 8, 10), rng.uniform(0, 8, 10), rng.uniform(-3, 3, 10)])
    i = 4
    labels = label_waypoints(path, i, 5)
    px, py, th = path[i]
    rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    world_pts = labels @ rot.T + (px, py)
    expected = path[np.minimum(np.arange(i, i + 6), len(path) - 1), :2]
    assert np.allclose(world_pts, expected, atol=1e-9)
