"""Per-stage run manifests: begin/finalize records around every pipeline stage."""

from __future__ import annotations

import json
import time
from pathlib import Path

from .. import __version__
from ..errors import ConfigError


class StageExistsError(ConfigError):
    pass


def manifest_path(run_dir: Path, stage: str) -> Path:
    return run_dir / "manifests" / f"{stage}.json"


def stage_guard(run_dir: Path, stage: str, force: bool) -> None:
    """Refuse to rerun a completed stage unless forced."""
    path = manifest_path(run_dir, stage)
    if path.exists() and not force:
        raise StageExistsError(
            f"stage {stage!r} already has outputs under {run_dir}; rerun with --force")


def stage_begin(run_dir: Path, stage: str, config_hash: str, seed: int) -> dict:
    record = {
        "stage": stage,
        "status": "running",
        "config_hash": config_hash,
        "code_version": __version__,
        "seed": seed,
        "started_unix": time.time(),
        "outputs": {},
    }
    path = manifest_path(run_dir, stage)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, sort_keys=True, indent=1), encoding="utf-8")
    return record


def stage_finish(run_dir: Path, record: dict, outputs: dict[str, str]) -> None:
    record["status"] = "done"
    record["outputs"] = outputs
    record["wall_clock_s"] = round(time.time() - record["started_unix"], 3)
    path = manifest_path(run_dir, record["stage"])
    path.write_text(json.dumps(record, sort_keys=True, indent=1), encoding="utf-8")
