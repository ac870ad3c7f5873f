"""Seed-matched experiment batches: one workload, many scheme variants.

Every variant in a batch consumes the workload generated from the same
seed and spec, so metric comparisons are paired. The comparison table is
long-format (variant, metric, value) with a normalized-by-minimum column
per metric.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace as dc_replace

from .engine import SCHEMES, SimConfig, run
from .errors import ConfigError
from .load_model import WeightStrategy
from .metrics import emit_files, summarize
from .scheduling import POLICIES
from .workload import (WorkloadSpec, generate_workload, workload_base_hash,
                       workload_hash)

SWEEP_AXES = ("pf", "policy", "scheme", "receivers", "weight")

COMPARISON_METRICS = ("mean_completion", "median_completion", "p95_completion",
                      "total_bandwidth", "mean_throughput", "makespan_slots",
                      "max_group_entries")


@dataclass(frozen=True)
class VariantResult:
    name: str
    summary: dict
    files: dict[str, str]
    workload_hash: str
    workload_base_hash: str


@dataclass(frozen=True)
class SweepResult:
    axis: str
    variants: tuple[VariantResult, ...]
    comparison_csv: str


def _apply_axis(config: SimConfig, axis: str, value) -> SimConfig:
    if axis == "pf":
        return dc_replace(config, pf=float(value))
    if axis == "policy":
        if value not in POLICIES:
            raise ConfigError(f"unknown policy {value!r}")
        return dc_replace(config, policy=str(value))
    if axis == "scheme":
        if value not in SCHEMES:
            raise ConfigError(f"unknown scheme {value!r}")
        return dc_replace(config, scheme=str(value))
    if axis == "weight":
        return dc_replace(config, weight=WeightStrategy.parse(value))
    if axis == "receivers":
        if config.workload is None:
            raise ConfigError("receivers sweep needs a generated workload")
        wl = dc_replace(config.workload, receivers_per_transfer=int(value))
        return dc_replace(config, workload=wl)
    raise ConfigError(f"unknown sweep axis {axis!r}; expected {SWEEP_AXES}")


def _flat_metrics(summary: dict) -> dict[str, float]:
    out: dict[str, float] = {}
    comp = summary.get("completion")
    if comp:
        out["mean_completion"] = comp["mean"]
        out["median_completion"] = comp["median"]
        out["p95_completion"] = comp["p95"]
    out["total_bandwidth"] = summary["total_bandwidth"]
    out["mean_throughput"] = summary["mean_throughput"]
    out["makespan_slots"] = summary["makespan_slots"]
    group = summary.get("group_table")
    if group:
        out["max_group_entries"] = group["max_entries"]
    for k, v in enumerate(summary.get("rank_mean_completion") or [], start=1):
        out[f"rank_{k}_mean_completion"] = v
    return out


def _slug(axis: str, value) -> str:
    text = f"{axis}-{value}".lower()
    return "".join(ch if ch.isalnum() or ch in "._-" else "-" for ch in text)


def run_variant(config: SimConfig, name: str) -> VariantResult:
    if config.transfers is None:
        transfers = generate_workload(config.workload, config.topology, config.delta)
        config = dc_replace(config, transfers=transfers)
    report = run(config)
    summary = summarize(report)
    files = emit_files(report, summary, config.topology)
    return VariantResult(
        name=name, summary=summary, files=files,
        workload_hash=workload_hash(config.transfers),
        workload_base_hash=workload_base_hash(config.transfers))


def run_sweep(base: SimConfig, axis: str, values, workers: int = 1) -> SweepResult:
    """Run one variant per axis value against a seed-paired workload."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected {SWEEP_AXES}")
    if not values:
        raise ConfigError("sweep needs at least one axis value")
    jobs = [( _apply_axis(base, axis, v), _slug(axis, v)) for v in values]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: run_variant(*job), jobs))
    else:
        results = [run_variant(cfg, name) for cfg, name in jobs]
    return SweepResult(axis=axis, variants=tuple(results),
                       comparison_csv=comparison_table(results))


def comparison_table(variants) -> str:
    """Long-format (variant, metric, value, normalized_by_min) CSV."""
    rows = []
    per_metric: dict[str, list[tuple[str, float]]] = {}
    for v in variants:
        for metric, value in _flat_metrics(v.summary).items():
            per_metric.setdefault(metric, []).append((v.name, value))
    for metric in sorted(per_metric):
        entries = per_metric[metric]
        floor = min(val for _, val in entries)
        for name, val in entries:
            norm = val / floor if floor > 0 else (1.0 if val == floor else float("inf"))
            rows.append((name, metric, val, norm))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("variant", "metric", "value", "normalized_by_min"))
    writer.writerows(rows)
    return buf.getvalue()
