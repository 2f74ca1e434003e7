"""Comparison tables across variants, datasets, and scenarios."""

from __future__ import annotations

from .benchmark import METRIC_NAMES, MetricsReport, aggregate_trials
from .rollout import RolloutResult
from ..errors import NavgateError


def _mark(values: list[float], value: float, higher_better: bool) -> str:
    ordered = sorted(set(values), reverse=higher_better)
    if value == ordered[0]:
        return "*"
    if len(ordered) > 1 and value == ordered[1]:
        return "+"
    return ""


def compare_offline(reports: list[MetricsReport]) -> str:
    """Rows = variants, columns = dataset x metric. '*' best, '+' runner-up.

    Lower is better for every offline metric. Aggregates are recomputed from
    the per-trial records and must match the stored values.
    """
    if not reports:
        raise NavgateError("no reports to compare")
    for r in reports:
        recomputed = aggregate_trials(r.trials)
        for m in METRIC_NAMES:
            drift = abs(recomputed[m]["mean"] - r.aggregates[m]["mean"])
            if drift > 1e-12:
                raise NavgateError(
                    f"report {r.variant}/{r.dataset_id}: stored mean differs from "
                    f"re-aggregation by {drift}")

    datasets = sorted({r.dataset_id for r in reports})
    variants = sorted({r.variant for r in reports})
    by_key = {(r.variant, r.dataset_id): r for r in reports}

    header = ["variant"]
    for ds in datasets:
        header += [f"{ds}/{m}" for m in METRIC_NAMES]
    lines = ["\t".join(header)]
    for variant in variants:
        row = [variant]
        for ds in datasets:
            for m in METRIC_NAMES:
                rep = by_key.get((variant, ds))
                if rep is None:
                    row.append("-")
                    continue
                col_vals = [by_key[(v, ds)].aggregates[m]["mean"]
                            for v in variants if (v, ds) in by_key]
                mean = rep.aggregates[m]["mean"]
                ci = rep.aggregates[m]["ci95"]
                row.append(f"{mean:.4f}±{ci:.4f}{_mark(col_vals, mean, False)}")
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def compare_rollouts(results: dict[str, dict[str, RolloutResult]]) -> str:
    """results[variant][scenario] -> table of SR% (higher better) and
    collision means (lower better)."""
    variants = sorted(results)
    scenarios = sorted({s for per in results.values() for s in per})
    header = ["variant"]
    for sc in scenarios:
        header += [f"{sc}/sr%", f"{sc}/collisions"]
    lines = ["\t".join(header)]
    for variant in variants:
        row = [variant]
        for sc in scenarios:
            res = results[variant].get(sc)
            if res is None:
                row += ["-", "-"]
                continue
            srs = [results[v][sc].success_rate for v in variants if sc in results[v]]
            cols = [results[v][sc].mean_collisions for v in variants if sc in results[v]]
            row.append(f"{res.success_rate * 100:.0f}{_mark(srs, res.success_rate, True)}")
            row.append(f"{res.mean_collisions:.2f}{_mark(cols, res.mean_collisions, False)}")
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"
