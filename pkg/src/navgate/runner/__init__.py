from .config import ExperimentConfig, EvalSettings, TrainSettings, config_hash_of, load_config
from .train import WindowDataset, train_policy
