from .traj import ade, dtw_norm, endpoint_dispersion, fde
from .benchmark import (
    METRIC_NAMES, MetricsReport, TrialRecord, aggregate_trials, diversity_dispersion,
    episode_window, offline_benchmark,
)
from .rollout import RolloutResult, build_rollout_setup, rollout, rollout_trial
from .report import compare_offline, compare_rollouts
