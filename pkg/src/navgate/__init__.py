"""navgate: a desk-scale lab for prior-preserving fine-tuning of
goal-conditioned diffusion navigation policies.

Subpackages:
    autodiff  - float64 reverse-mode engine, AdamW, LR schedule, grad checks
    kernels   - numba-accelerated hot loops with pure-numpy fallbacks
    sim       - procedural 2D worlds, raycast camera, expert planner, datasets
    policy    - encoders, context fusion, conditional 1-D U-Net, DDPM loops
    variants  - fine-tuning variants (zero-gated depth branch, full FT, early fusion)
    metrics   - ADE/FDE/DTW, offline benchmark, diversity, closed-loop rollouts
    runner    - config files, stage manifests, training loop, CLI

BLAS threading is pinned to one thread (when numpy is not already loaded):
the workload is many small matrix products, where thread fan-out costs more
than it buys. Override by setting OMP_NUM_THREADS before importing.
"""

import os as _os
import sys as _sys

if "numpy" not in _sys.modules:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, "1")

__version__ = "0.1.0"
