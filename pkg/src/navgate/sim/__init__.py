from .world import (
    CELL_SIZE, SCENARIOS, Obstacle, Pose, WorldMap, generate_world, rasterize, wrap_angle,
)
from .camera import PALETTES, CameraSpec, Observation, raycast_observe
from .expert import (
    GOAL_TOLERANCE, RESAMPLE_STEP, ROBOT_RADIUS,
    grid_shortest_path, inflate_occupancy, label_waypoints, plan_expert,
)
from .dataset import (
    DomainSpec, EpisodeData, NavsetReader, derive_seed, generate_dataset, generate_episode,
)
from .topomap import TopoMap, capture_goal_images
