"""Pipeline stages: data generation, training, evaluation, reporting.

Every stage derives its own seeds from the master seed, writes a manifest
before and after, and refuses to overwrite existing outputs unless forced.
Stages are individually rerunnable and byte-deterministic given (config,
seed).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ConfigError, DatasetError
from ..metrics.benchmark import diversity_dispersion, episode_window, offline_benchmark
from ..metrics.report import compare_offline, compare_rollouts
from ..metrics.rollout import RolloutResult, rollout
from ..sim.dataset import NavsetReader, derive_seed, generate_dataset
from ..sim.world import SCENARIOS
from ..variants import VARIANTS, Policy, build_variant, init_zero_shot
from .config import ExperimentConfig
from .manifest import stage_begin, stage_finish, stage_guard
from .train import WindowDataset, save_loss_curve, train_policy, training_seed

DATA_KEYS = {"a": "data_a", "b": "data_b", "a-eval": "data_a_eval"}
OFFLINE_DATASETS = ("a-eval", "b")


def _run_dir(cfg: ExperimentConfig, seed: int) -> Path:
    d = cfg.run_dir(seed)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _seed_of(cfg: ExperimentConfig, seed: int | None) -> int:
    return cfg.master_seed if seed is None else seed


def data_dir(cfg: ExperimentConfig, seed: int, key: str) -> Path:
    return cfg.run_dir(seed) / "data" / key


def ckpt_path(cfg: ExperimentConfig, seed: int, name: str) -> Path:
    return cfg.run_dir(seed) / "ckpt" / f"{name}.ckpt"


def cmd_gen_data(cfg: ExperimentConfig, domain: str, seed: int | None = None,
                 force: bool = False, quiet: bool = False) -> Path:
    if domain not in DATA_KEYS:
        raise ConfigError(f"unknown domain {domain!r}; expected one of {sorted(DATA_KEYS)}")
    seed = _seed_of(cfg, seed)
    run = _run_dir(cfg, seed)
    stage = f"gen-data-{domain}"
    stage_guard(run, stage, force)
    record = stage_begin(run, stage, cfg.config_hash, seed)
    spec = getattr(cfg, DATA_KEYS[domain])
    out = data_dir(cfg, seed, domain)
    if not quiet:
        print(f"[{stage}] {spec.episodes} episodes of {','.join(spec.scenarios)} -> {out}")
    generate_dataset(out, spec, derive_seed(seed, "data", domain))
    stage_finish(run, record, {"dataset": str(out)})
    return out


def cmd_pretrain(cfg: ExperimentConfig, seed: int | None = None, force: bool = False,
                 quiet: bool = False) -> Path:
    from ..variants import init_base_policy

    seed = _seed_of(cfg, seed)
    run = _run_dir(cfg, seed)
    stage_guard(run, "pretrain", force)
    record = stage_begin(run, "pretrain", cfg.config_hash, seed)

    ds = data_dir(cfg, seed, "a")
    if not ds.exists():
        raise DatasetError(f"missing domain-A dataset at {ds}; run gen-data first")
    data = WindowDataset(NavsetReader(ds))
    normalizer = data.fit_normalizer()
    policy = init_base_policy(
        cfg.policy, np.random.default_rng(np.random.SeedSequence((derive_seed(seed, "init"), 1))),
        normalizer)
    if not quiet:
        print(f"[pretrain] {len(data.index)} windows, {cfg.train.pretrain_epochs} epochs")
    curve = train_policy(
        policy, data, cfg.train.pretrain_epochs, cfg.train.batch_size, cfg.train.base_lr,
        cfg.train.warmup_frac, cfg.train.weight_decay, training_seed(seed, "pretrain"),
        quiet=quiet)

    out = ckpt_path(cfg, seed, "pretrain")
    out.parent.mkdir(parents=True, exist_ok=True)
    policy.save(out)
    logs = run / "logs"
    logs.mkdir(exist_ok=True)
    save_loss_curve(logs / "pretrain_loss.tsv", curve)
    stage_finish(run, record, {"checkpoint": str(out),
                               "final_loss": repr(curve[-1]), "initial_loss": repr(curve[0])})
    return out


def cmd_finetune(cfg: ExperimentConfig, variant: str, seed: int | None = None,
                 force: bool = False, quiet: bool = False) -> Path:
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    seed = _seed_of(cfg, seed)
    run = _run_dir(cfg, seed)
    stage = f"finetune-{variant}"
    stage_guard(run, stage, force)
    record = stage_begin(run, stage, cfg.config_hash, seed)

    base = Policy.load(ckpt_path(cfg, seed, "pretrain"))
    out = ckpt_path(cfg, seed, variant)
    out.parent.mkdir(parents=True, exist_ok=True)

    if variant == "zero-shot":
        init_zero_shot(base).save(out)
        stage_finish(run, record, {"checkpoint": str(out)})
        return out

    ds = data_dir(cfg, seed, "b")
    if not ds.exists():
        raise DatasetError(f"missing domain-B dataset at {ds}; run gen-data first")
    data = WindowDataset(NavsetReader(ds))
    rng = np.random.default_rng(np.random.SeedSequence((derive_seed(seed, "init", variant), 2)))
    policy = build_variant(base, variant, rng)
    if not quiet:
        print(f"[{stage}] {len(data.index)} windows, {cfg.train.finetune_epochs} epochs, "
              f"{policy.store.total_size(trainable_only=True)} trainable params")
    curve = train_policy(
        policy, data, cfg.train.finetune_epochs, cfg.train.batch_size, cfg.train.base_lr,
        cfg.train.warmup_frac, cfg.train.weight_decay, training_seed(seed, variant),
        quiet=quiet)
    policy.save(out)
    logs = run / "logs"
    logs.mkdir(exist_ok=True)
    save_loss_curve(logs / f"{variant}_loss.tsv", curve)
    stage_finish(run, record, {"checkpoint": str(out),
                               "final_loss": repr(curve[-1]), "initial_loss": repr(curve[0])})
    return out


def available_checkpoints(cfg: ExperimentConfig, seed: int) -> list[str]:
    return [v for v in VARIANTS if ckpt_path(cfg, seed, v).exists()]


def cmd_eval_offline(cfg: ExperimentConfig, variants: list[str] | None = None,
                     seed: int | None = None, force: bool = False,
                     quiet: bool = False) -> str:
    """Offline benchmark of every requested variant on held-out domain A and
    domain B, plus the expert self-test row and the diversity probes."""
    seed = _seed_of(cfg, seed)
    run = _run_dir(cfg, seed)
    stage_guard(run, "eval-offline", force)
    record = stage_begin(run, "eval-offline", cfg.config_hash, seed)
    out_dir = run / "eval"
    out_dir.mkdir(exist_ok=True)

    names = variants if variants else available_checkpoints(cfg, seed)
    if not names:
        raise DatasetError("no checkpoints found; run pretrain/finetune first")

    readers = {}
    for key in OFFLINE_DATASETS:
        path = data_dir(cfg, seed, key)
        if not path.exists():
            raise DatasetError(f"missing dataset {key} at {path}")
        readers[key] = NavsetReader(path)

    reports = []
    outputs = {}
    for key, reader in sorted(readers.items()):
        rep = offline_benchmark(None, reader, cfg.eval.offline_trials,
                                derive_seed(seed, "eval", "expert", key),
                                dataset_id=key, config_hash=cfg.config_hash)
        path = out_dir / f"offline_expert_{key}.json"
        path.write_text(rep.to_json(), encoding="utf-8")
        outputs[f"expert/{key}"] = str(path)
        reports.append(rep)

    for variant in names:
        policy = Policy.load(ckpt_path(cfg, seed, variant))
        for key, reader in sorted(readers.items()):
            if not quiet:
                print(f"[eval-offline] {variant} on {key} ({cfg.eval.offline_trials} trials)")
            rep = offline_benchmark(policy, reader, cfg.eval.offline_trials,
                                    derive_seed(seed, "eval", variant, key),
                                    dataset_id=key, variant=variant,
                                    config_hash=cfg.config_hash)
            path = out_dir / f"offline_{variant}_{key}.json"
            path.write_text(rep.to_json(), encoding="utf-8")
            (out_dir / f"offline_{variant}_{key}.tsv").write_text(
                rep.flat_table(), encoding="utf-8")
            outputs[f"{variant}/{key}"] = str(path)
            reports.append(rep)

        divs = _diversity_for(cfg, seed, policy, readers["a-eval"])
        dpath = out_dir / f"diversity_{variant}.json"
        dpath.write_text(json.dumps(divs, sort_keys=True, indent=1), encoding="utf-8")
        outputs[f"diversity/{variant}"] = str(dpath)

    table = compare_offline(reports)
    table_path = out_dir / "offline_table.tsv"
    table_path.write_text(table, encoding="utf-8")
    outputs["table"] = str(table_path)
    stage_finish(run, record, outputs)
    if not quiet:
        print(table)
    return table


def _diversity_for(cfg: ExperimentConfig, seed: int, policy: Policy,
                   reader: NavsetReader) -> dict:
    """Endpoint dispersion over fixed held-out contexts (one per episode)."""
    dispersions = []
    for i in range(cfg.eval.diversity_contexts):
        ctx_seed = derive_seed(seed, "divctx", i)
        pick = np.random.default_rng(np.random.SeedSequence((ctx_seed, 0)))
        ep = reader.episode(int(pick.integers(0, len(reader))))
        t = int(pick.integers(0, len(ep.poses)))
        window = episode_window(ep, t, policy.cfg.frames)
        disp, _hvar = diversity_dispersion(policy, window, ep.goal_image,
                                           cfg.eval.diversity_samples, ctx_seed)
        dispersions.append(disp)
    return {
        "variant": policy.variant,
        "n_contexts": cfg.eval.diversity_contexts,
        "n_samples": cfg.eval.diversity_samples,
        "dispersions": dispersions,
        "median": float(np.median(dispersions)),
    }


def cmd_eval_rollout(cfg: ExperimentConfig, variant: str, scenario: str,
                     seed: int | None = None, force: bool = False,
                     quiet: bool = False) -> RolloutResult:
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    seed = _seed_of(cfg, seed)
    run = _run_dir(cfg, seed)
    stage = f"eval-rollout-{variant}-{scenario}"
    stage_guard(run, stage, force)
    record = stage_begin(run, stage, cfg.config_hash, seed)

    policy = Policy.load(ckpt_path(cfg, seed, variant))
    # the empty corridor probes the pre-training rig; everything else runs on
    # the deployment camera
    domain = cfg.data_a if scenario == "empty-corridor" else cfg.data_b
    if not quiet:
        print(f"[{stage}] {cfg.eval.rollout_trials} trials, camera fov {domain.camera.fov_deg}")
    result = rollout(policy, scenario, domain.camera, domain.palette,
                     cfg.eval.rollout_trials, derive_seed(seed, "ro", variant, scenario),
                     max_steps=cfg.eval.rollout_max_steps)
    out_dir = run / "eval"
    out_dir.mkdir(exist_ok=True)
    path = out_dir / f"rollout_{variant}_{scenario}.json"
    path.write_text(result.to_json(), encoding="utf-8")
    stage_finish(run, record, {"result": str(path),
                               "success_rate": f"{result.success_rate:.2f}"})
    if not quiet:
        print(f"[{stage}] SR {result.success_rate * 100:.0f}% "
              f"collisions/trial {result.mean_collisions:.2f}")
    return result


def cmd_report(cfg: ExperimentConfig, seed: int | None = None) -> str:
    """Assemble comparison tables from whatever eval outputs exist."""
    from ..metrics.benchmark import MetricsReport

    seed = _seed_of(cfg, seed)
    out_dir = cfg.run_dir(seed) / "eval"
    if not out_dir.exists():
        raise DatasetError(f"no eval outputs under {out_dir}")
    sections = []

    offline = sorted(out_dir.glob("offline_*.json"))
    if offline:
        reports = [MetricsReport.from_json(p.read_text(encoding="utf-8")) for p in offline]
        sections.append("== offline benchmark ==\n" + compare_offline(reports))

    rollouts: dict[str, dict[str, RolloutResult]] = {}
    for p in sorted(out_dir.glob("rollout_*.json")):
        raw = json.loads(p.read_text(encoding="utf-8"))
        variant = p.stem.split("_")[1]  # variant and scenario names are hyphenated
        res = RolloutResult(**raw)
        rollouts.setdefault(variant, {})[res.scenario] = res
    if rollouts:
        sections.append("== closed-loop rollouts ==\n" + compare_rollouts(rollouts))

    divs = sorted(out_dir.glob("diversity_*.json"))
    if divs:
        lines = ["variant\tmedian_dispersion"]
        for p in divs:
            raw = json.loads(p.read_text(encoding="utf-8"))
            lines.append(f"{raw['variant']}\t{raw['median']:.4f}")
        sections.append("== diversity (held-out domain A) ==\n" + "\n".join(lines) + "\n")

    text = "\n".join(sections) if sections else "(no eval outputs yet)\n"
    (cfg.run_dir(seed) / "report.txt").write_text(text, encoding="utf-8")
    return text
