"""Closed-loop simulated rollouts over topological goal maps."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..sim.camera import CameraSpec, raycast_observe
from ..sim.dataset import derive_seed
from ..sim.expert import GOAL_TOLERANCE, ROBOT_RADIUS, plan_expert
from ..sim.topomap import TopoMap, capture_goal_images
from ..sim.world import Pose, WorldMap, generate_world, wrap_angle

V_MAX = 0.45        # m/s linear cap
W_MAX = 1.0         # rad/s angular cap
DT = 0.25           # controller period, seconds
ADVANCE_RADIUS = 1.0
TOPO_SPACING = 1.5


@dataclass
class RolloutResult:
    scenario: str
    trials: int
    successes: int
    collisions: list[int] = field(default_factory=list)
    steps: list[int] = field(default_factory=list)
    reached: list[bool] = field(default_factory=list)
    trajectories: list[list[tuple[float, float]]] = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def mean_collisions(self) -> float:
        return float(np.mean(self.collisions)) if self.collisions else 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=1)


def build_rollout_setup(scenario: str, seed: int, camera: CameraSpec,
                        palette: str) -> tuple[WorldMap, TopoMap, np.ndarray]:
    """World plus a topomap captured before map-absent obstacles appear."""
    world = generate_world(seed, scenario)
    snapshot = world.without_map_absent()
    route = plan_expert(snapshot, Pose(*world.start, 0.0), Pose(*world.goal, 0.0))
    topo = capture_goal_images(world, route, TOPO_SPACING, camera, palette)
    return world, topo, route


def rollout_trial(policy, world: WorldMap, topo: TopoMap, camera: CameraSpec,
                  palette: str, seed: int, max_steps: int) -> dict:
    """One closed-loop episode; returns reached flag, collision events, logs."""
    rng_obs = np.random.default_rng(np.random.SeedSequence((seed, 10)))
    rng_act = np.random.default_rng(np.random.SeedSequence((seed, 11)))
    x, y, heading = topo.poses[0]
    frames = policy.cfg.frames
    history: list[np.ndarray] = []
    subgoal = 0
    collisions = 0
    in_contact = False
    reached = False
    trace = [(float(x), float(y))]

    for _step in range(max_steps):
        obs = raycast_observe(world, Pose(x, y, heading), camera, rng_obs, palette).rgbd()
        history.append(obs)
        if len(history) == 1:
            history *= frames
        window = np.stack(history[-frames:])

        while subgoal < len(topo) - 1 and math.hypot(
                x - topo.poses[subgoal][0], y - topo.poses[subgoal][1]) <= ADVANCE_RADIUS:
            subgoal += 1

        traj = policy.sample(window, topo.images[subgoal], rng_act, 1)[0]
        tx, ty = traj[1]

        turn = math.atan2(ty, tx)
        turn = max(-W_MAX * DT, min(W_MAX * DT, wrap_angle(turn)))
        heading = wrap_angle(heading + turn)
        step_len = min(math.hypot(tx, ty), V_MAX * DT)
        x = min(max(x + step_len * math.cos(heading), 0.05), world.width - 0.05)
        y = min(max(y + step_len * math.sin(heading), 0.05), world.height - 0.05)
        trace.append((float(x), float(y)))

        if world.collides(x, y, ROBOT_RADIUS):
            if not in_contact:
                collisions += 1
            in_contact = True
        else:
            in_contact = False

        gx, gy = topo.poses[-1][0], topo.poses[-1][1]
        if math.hypot(x - gx, y - gy) <= GOAL_TOLERANCE:
            reached = True
            break

    return {"reached": reached, "collisions": collisions, "steps": len(trace) - 1,
            "trace": trace}


def rollout(policy, scenario: str, camera: CameraSpec, palette: str,
            n_trials: int, master_seed: int, max_steps: int = 400) -> RolloutResult:
    """n_trials rollouts in one scenario world; success = reach with zero
    collision events (events are contact episodes, counted with hysteresis)."""
    world_seed = derive_seed(master_seed, "rollout-world", scenario)
    world, topo, _route = build_rollout_setup(scenario, world_seed, camera, palette)
    result = RolloutResult(scenario=scenario, trials=n_trials, successes=0)
    for trial in range(n_trials):
        seed = derive_seed(master_seed, "rollout", scenario, trial)
        out = rollout_trial(policy, world, topo, camera, palette, seed, max_steps)
        success = out["reached"] and out["collisions"] == 0
        result.successes += int(success)
        result.collisions.append(out["collisions"])
        result.steps.append(out["steps"])
        result.reached.append(out["reached"])
        result.trajectories.append(out["trace"])
    return result
