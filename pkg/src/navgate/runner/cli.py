"""Command-line entry point.

Verbs: gen-data, pretrain, finetune, eval-offline, eval-rollout, report,
gradcheck, selftest. Exit codes: 0 success, 1 usage, 2 data error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys

from ..errors import (
    CheckpointError, ConfigError, DatasetError, NanDetectedError, NavgateError,
    NonDeterministicForwardError,
)

USAGE_EXIT = 1
DATA_EXIT = 2
NUMERIC_EXIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="navgate", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--force", action="store_true", help="overwrite existing stage outputs")
        p.add_argument("--out", default=None, help="override the output root directory")
        p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("gen-data", help="generate a NAVSET dataset")
    p.add_argument("--domain", required=True, choices=["a", "b", "a-eval"])
    common(p)

    common(sub.add_parser("pretrain", help="train the base policy on domain A"))

    p = sub.add_parser("finetune", help="fine-tune a variant on domain B")
    p.add_argument("--variant", required=True)
    common(p)

    p = sub.add_parser("eval-offline", help="offline benchmark + diversity probes")
    p.add_argument("--variant", action="append", default=None,
                   help="restrict to this variant (repeatable)")
    common(p)

    p = sub.add_parser("eval-rollout", help="closed-loop rollouts in a scenario")
    p.add_argument("--variant", required=True)
    p.add_argument("--scenario", required=True)
    common(p)

    common(sub.add_parser("report", help="assemble comparison tables"))

    p = sub.add_parser("gradcheck", help="finite-difference gradient audit")
    p.add_argument("--probes", type=int, default=60)

    sub.add_parser("selftest", help="fast internal consistency checks")
    return parser


def _load(args):
    from .config import load_config

    cfg = load_config(args.config)
    if args.out:
        object.__setattr__(cfg, "out_root", args.out)
    return cfg


def run_gradcheck(probes: int) -> int:
    import numpy as np

    from ..autodiff import Tensor, gradient_check, mse
    from ..policy import ActionNormalizer, PolicyConfig
    from ..policy.diffusion import corrupt
    from ..variants import build_variant, init_base_policy

    cfg = PolicyConfig(history=1, horizon=3, rays=8, embed_dim=8, channels=(4, 6, 4),
                       diffusion_steps=4)
    norm = ActionNormalizer([-1.0, -1.0], [1.0, 1.0])
    rng = np.random.default_rng(0)
    base = init_base_policy(cfg, rng, norm)
    for _, t in base.store.items():
        t.data[...] = rng.standard_normal(t.data.shape) * 0.3

    win = rng.random((2, cfg.frames, 4, 8))
    goal = rng.random((2, 3, 8))
    labels = rng.uniform(-1, 1, (2, cfg.length, 2))
    k = np.array([1, 3])
    noise = rng.standard_normal((2, 2, cfg.length))
    x_k = corrupt(base.schedule, np.ascontiguousarray(labels.transpose(0, 2, 1)), k, noise)

    worst = 0.0
    failures = []
    for tag in ("full-ft", "early-fusion", "depth-gated"):
        policy = build_variant(base, tag, np.random.default_rng(1))
        if tag == "depth-gated":
            # generic point: gates must carry signal for the probe to be fair
            gen = np.random.default_rng(2)
            for name in policy.store.trainable_names():
                if name.startswith("gate."):
                    policy.store[name].data[...] = gen.standard_normal(
                        policy.store[name].data.shape) * 0.2

        def forward(store, policy=policy):
            eps = policy.eps_closure(win, goal)(Tensor(x_k), k)
            return mse(eps, Tensor(noise))

        err = gradient_check(forward, policy.store, probe_count=probes, h=1e-6, seed=3)
        status = "PASS" if err < 1e-5 else "FAIL"
        print(f"gradcheck {tag}: max relative error {err:.3e} [{status}]")
        worst = max(worst, err)
        if err >= 1e-5:
            failures.append(tag)

    # zero-initialized gates must still receive nonzero gradients
    from navgate.autodiff import backward
    dg = build_variant(base, "depth-gated")
    loss = mse(dg.eps_closure(win, goal)(Tensor(x_k), k), Tensor(noise))
    dg.store.zero_grad()
    backward(loss)
    gate_ok = any(np.any(dg.store[f"gate.s{i}.w"].grad != 0.0) for i in (1, 2, 3))
    print(f"gradcheck zero-gate gradient flow: {'PASS' if gate_ok else 'FAIL'}")
    if not gate_ok:
        failures.append("zero-gate-flow")
    return NUMERIC_EXIT if failures else 0


def run_selftest() -> int:
    import tempfile

    import numpy as np

    from .. import kernels
    from ..autodiff import ParameterStore, Tensor, conv1d
    from ..checkpoint import load_checkpoint, save_checkpoint
    from ..kernels import numba_impl, numpy_impl
    from ..metrics import ade, dtw_norm, fde
    from ..policy.diffusion import noise_schedule

    checks: list[tuple[str, bool]] = []

    sched = noise_schedule(32)
    checks.append(("schedule starts at 1", sched.alpha_bar[0] == 1.0))
    checks.append(("schedule strictly decreasing", bool(np.all(np.diff(sched.alpha_bar) < 0))))

    p = np.random.default_rng(0).random((8, 2))
    checks.append(("metric identities", ade(p, p) == 0.0 and fde(p, p) == 0.0
                   and dtw_norm(p, p) == 0.0))

    x = Tensor(np.random.default_rng(1).standard_normal((2, 4, 6)))
    zero = conv1d(x, Tensor(np.zeros((4, 4, 1))), Tensor(np.zeros(4)))
    checks.append(("zero conv is exact zero", bool(np.all(zero.data == 0.0))))

    rng = np.random.default_rng(2)
    grid = (rng.random((40, 40)) < 0.1).astype(np.int32)
    ang = rng.uniform(-np.pi, np.pi, 32)
    args = (grid, 2.0, 2.0, np.cos(ang), np.sin(ang), 0.1, 5.0)
    d1, c1 = numba_impl.raycast_scan(*args)
    d2, c2 = numpy_impl.raycast_scan(*args)
    checks.append(("raycast backends bit-identical",
                   d1.tobytes() == d2.tobytes() and np.array_equal(c1, c2)))
    a, b = rng.random((30, 2)), rng.random((25, 2))
    checks.append(("dtw backends bit-identical",
                   numba_impl.dtw_cost(a, b) == numpy_impl.dtw_cost(a, b)))

    store = ParameterStore()
    store.add("w", rng.standard_normal((3, 3)))
    with tempfile.TemporaryDirectory() as tmp:
        save_checkpoint(tmp + "/t.ckpt", store, {"k": "v"})
        loaded, meta = load_checkpoint(tmp + "/t.ckpt")
    checks.append(("checkpoint round trip",
                   loaded["w"].data.tobytes() == store["w"].data.tobytes() and meta == {"k": "v"}))

    print(f"kernel backend: {kernels.backend_name()}")
    failed = [name for name, ok in checks if not ok]
    for name, ok in checks:
        print(f"selftest {name}: {'PASS' if ok else 'FAIL'}")
    return NUMERIC_EXIT if failed else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "gradcheck":
            return run_gradcheck(args.probes)
        if args.verb == "selftest":
            return run_selftest()

        from . import pipeline

        cfg = _load(args)
        if args.verb == "gen-data":
            pipeline.cmd_gen_data(cfg, args.domain, args.seed, args.force, args.quiet)
        elif args.verb == "pretrain":
            pipeline.cmd_pretrain(cfg, args.seed, args.force, args.quiet)
        elif args.verb == "finetune":
            pipeline.cmd_finetune(cfg, args.variant, args.seed, args.force, args.quiet)
        elif args.verb == "eval-offline":
            pipeline.cmd_eval_offline(cfg, args.variant, args.seed, args.force, args.quiet)
        elif args.verb == "eval-rollout":
            pipeline.cmd_eval_rollout(cfg, args.variant, args.scenario, args.seed,
                                      args.force, args.quiet)
        elif args.verb == "report":
            print(pipeline.cmd_report(cfg, args.seed))
        return 0
    except (NanDetectedError, NonDeterministicForwardError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return NUMERIC_EXIT
    except (ConfigError, DatasetError, CheckpointError, FileNotFoundError, NavgateError) as e:
        print(f"error: {e}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
