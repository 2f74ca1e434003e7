"""Fixed-seed offline benchmark and trajectory-diversity probes."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from ..errors import DatasetError
from ..sim.dataset import NavsetReader, derive_seed
from .traj import ade, dtw_norm, endpoint_dispersion, fde

METRIC_NAMES = ("ade", "fde", "dtw")


@dataclass
class TrialRecord:
    trial: int
    seed: int
    episode: int
    step: int
    ade: float
    fde: float
    dtw: float


@dataclass
class MetricsReport:
    dataset_id: str
    variant: str
    config_hash: str
    master_seed: int
    n_trials: int
    trials: list[TrialRecord] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = asdict(self)
        return json.dumps(payload, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        raw = json.loads(text)
        trials = [TrialRecord(**t) for t in raw.pop("trials")]
        return cls(trials=trials, **raw)

    def flat_table(self) -> str:
        lines = ["trial\tseed\tepisode\tstep\tade\tfde\tdtw"]
        for t in self.trials:
            lines.append(f"{t.trial}\t{t.seed}\t{t.episode}\t{t.step}\t"
                         f"{t.ade!r}\t{t.fde!r}\t{t.dtw!r}")
        return "\n".join(lines) + "\n"


def aggregate_trials(trials: list[TrialRecord]) -> dict:
    """Mean and 95% confidence half-width per metric (Student t)."""
    out = {}
    n = len(trials)
    for name in METRIC_NAMES:
        vals = np.array([getattr(t, name) for t in trials], dtype=np.float64)
        mean = float(vals.mean())
        if n > 1:
            half = float(stats.t.ppf(0.975, n - 1) * vals.std(ddof=1) / np.sqrt(n))
        else:
            half = 0.0
        out[name] = {"mean": mean, "ci95": half}
    return out


def episode_window(episode, t: int, frames: int) -> np.ndarray:
    """(T+1, 4, W) observation window ending at step t (left-clamped)."""
    idx = np.clip(np.arange(t - frames + 1, t + 1), 0, None)
    return episode.observations[idx]


def offline_benchmark(policy, dataset: NavsetReader, n_trials: int, master_seed: int,
                      dataset_id: str, variant: str | None = None,
                      config_hash: str = "") -> MetricsReport:
    """Sample n_trials (window, goal) pairs with derived seeds; one sampling
    pass each; ADE/FDE/DTW against the expert labels, aggregated with 95% CIs.

    policy=None is the expert self-test: predictions are the labels themselves.
    """
    if len(dataset) == 0:
        raise DatasetError(f"{dataset_id}: empty dataset")
    report = MetricsReport(
        dataset_id=dataset_id,
        variant=variant or (policy.variant if policy is not None else "expert"),
        config_hash=config_hash,
        master_seed=master_seed,
        n_trials=n_trials,
    )
    frames = (policy.cfg.frames if policy is not None else 4)
    for trial in range(n_trials):
        seed = derive_seed(master_seed, "offline", dataset_id, trial)
        pick = np.random.default_rng(np.random.SeedSequence((seed, 0)))
        e = int(pick.integers(0, len(dataset)))
        episode = dataset.episode(e)
        t = int(pick.integers(0, len(episode.poses)))
        labels = episode.labels[t]
        if policy is None:
            pred = labels.copy()
        else:
            window = episode_window(episode, t, frames)
            sampler = np.random.default_rng(np.random.SeedSequence((seed, 1)))
            pred = policy.sample(window, episode.goal_image, sampler, 1)[0]
        report.trials.append(TrialRecord(
            trial=trial, seed=seed, episode=e, step=t,
            ade=ade(pred, labels), fde=fde(pred, labels), dtw=dtw_norm(pred, labels)))
    report.aggregates = aggregate_trials(report.trials)
    return report


def diversity_dispersion(policy, window: np.ndarray, goal: np.ndarray,
                         n_samples: int = 20, master_seed: int = 0) -> tuple[float, float]:
    """Endpoint dispersion over n_samples trajectories drawn with distinct seeds."""
    if n_samples < 2:
        raise ValueError("need at least 2 samples for a dispersion")
    trajectories = []
    for i in range(n_samples):
        rng = np.random.default_rng(np.random.SeedSequence((derive_seed(
            master_seed, "diversity", i), 2)))
        trajectories.append(policy.sample(window, goal, rng, 1)[0])
    return endpoint_dispersion(np.stack(trajectories))
