from .config import PolicyConfig
from .normalize import ActionNormalizer
from .diffusion import NoiseSchedule, corrupt, ddpm_sample, ddpm_train_loss, noise_schedule
from .nets import (
    compute_context, encode_history, encode_observation, fuse_context,
    init_policy_params, sinusoidal_table, unet_apply, unet_forward,
)
