"""Run metrics: completion records, bandwidth, throughput, group tables.

A tree consumes one group-table entry at every non-root node where it
branches (out-degree >= 2); the entry's action-bucket count equals that
branching degree. Entries are held while the partition is active and
released on completion.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .steiner import ForwardingTree
from .topology import Topology


@dataclass(frozen=True)
class ReceiverRecord:
    request_id: int
    receiver: int
    arrival_slot: int
    completion_slot: int
    partition_id: int
    partition_size: int
    rank: int

    @property
    def duration(self) -> int:
        return self.completion_slot - self.arrival_slot


@dataclass(frozen=True)
class RequestRecord:
    request_id: int
    volume: float
    n_partitions: int
    bandwidth: float
    budget_weight_sum: float
    single_tree_weight: float


@dataclass(frozen=True)
class TimelineRecord:
    slot: int
    delivered_volume: float
    active_partitions: int
    max_group_entries: int


@dataclass
class MetricsReport:
    receivers: list[ReceiverRecord] = field(default_factory=list)
    requests: list[RequestRecord] = field(default_factory=list)
    timeline: list[TimelineRecord] = field(default_factory=list)
    group_max_per_node: np.ndarray | None = None
    node_names: tuple[str, ...] = ()
    config_echo: dict = field(default_factory=dict)


def group_table_entries(tree: ForwardingTree, topo: Topology) -> dict[int, int]:
    """Map node -> action-bucket count for every entry this tree needs."""
    return {node: deg for node, deg in tree.out_degrees(topo).items()
            if deg >= 2 and node != tree.root}


def percentile(values, pct: float) -> float:
    """Nearest-rank percentile of a sequence (pct in (0, 100])."""
    ordered = sorted(values)
    if not ordered:
        raise ValueError("percentile of empty data")
    rank = max(1, math.ceil(pct / 100.0 * len(ordered)))
    return float(ordered[rank - 1])


def summarize(report: MetricsReport) -> dict:
    """Summary statistics for a completed run (explicitly empty if no data)."""
    if not report.receivers:
        return {
            "receivers": 0,
            "requests": len(report.requests),
            "makespan_slots": len(report.timeline),
            "completion": None,
            "total_bandwidth": 0.0,
            "total_delivered": 0.0,
            "mean_throughput": 0.0,
            "rank_mean_completion": [],
            "partitions": None,
            "group_table": _group_summary(report),
        }
    durations = [r.duration for r in report.receivers]
    by_rank: dict[int, list[int]] = {}
    for r in report.receivers:
        by_rank.setdefault(r.rank, []).append(r.duration)
    rank_means = [float(np.mean(by_rank[k])) for k in sorted(by_rank)]
    delivered = float(sum(t.delivered_volume for t in report.timeline))
    slots = len(report.timeline)
    part_counts = [q.n_partitions for q in report.requests]
    return {
        "receivers": len(report.receivers),
        "requests": len(report.requests),
        "makespan_slots": slots,
        "completion": {
            "mean": float(np.mean(durations)),
            "median": percentile(durations, 50),
            "p95": percentile(durations, 95),
        },
        "total_bandwidth": float(sum(q.bandwidth for q in report.requests)),
        "total_delivered": delivered,
        "mean_throughput": delivered / slots if slots else 0.0,
        "rank_mean_completion": rank_means,
        "partitions": {
            "mean": float(np.mean(part_counts)),
            "max": int(max(part_counts)),
        },
        "group_table": _group_summary(report),
    }


def _group_summary(report: MetricsReport):
    if report.group_max_per_node is None:
        return None
    peaks = report.group_max_per_node
    return {
        "max_entries": int(peaks.max(initial=0)),
        "mean_max_entries": float(peaks.mean()) if len(peaks) else 0.0,
    }


RECEIVER_COLUMNS = ("request_id", "receiver", "arrival_slot", "completion_slot",
                    "partition_id", "partition_size", "rank")
REQUEST_COLUMNS = ("request_id", "volume", "n_partitions", "bandwidth",
                   "budget_weight_sum", "single_tree_weight")
TIMELINE_COLUMNS = ("slot", "delivered_volume", "active_partitions",
                    "max_group_entries")


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def emit_files(report: MetricsReport, summary: dict,
               names: "Topology | tuple[str, ...] | None" = None,
               fmt: str = "csv") -> dict[str, str]:
    """Render the report as {filename: text} with deterministic contents.

    fmt="csv" (the default) produces the three tabular files plus
    summary.json; fmt="json" mirrors the same rows and fields as JSON
    arrays instead.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown emit format {fmt!r}")
    node_names = report.node_names
    if isinstance(names, Topology):
        node_names = names.nodes
    elif names is not None:
        node_names = tuple(names)

    def node_label(i: int) -> str:
        return node_names[i] if node_names else str(i)

    receiver_rows = [
        (r.request_id, node_label(r.receiver), r.arrival_slot, r.completion_slot,
         r.partition_id, r.partition_size, r.rank)
        for r in sorted(report.receivers, key=lambda r: (r.request_id, r.rank))]
    request_rows = [
        (q.request_id, q.volume, q.n_partitions, q.bandwidth,
         q.budget_weight_sum, q.single_tree_weight)
        for q in sorted(report.requests, key=lambda q: q.request_id)]
    timeline_rows = [
        (t.slot, t.delivered_volume, t.active_partitions, t.max_group_entries)
        for t in report.timeline]
    payload = {"config": report.config_echo, "summary": summary}
    summary_text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if fmt == "json":
        def rows_json(columns, rows):
            return json.dumps([dict(zip(columns, row)) for row in rows],
                              indent=2) + "\n"
        return {
            "receivers.json": rows_json(RECEIVER_COLUMNS, receiver_rows),
            "requests.json": rows_json(REQUEST_COLUMNS, request_rows),
            "timeline.json": rows_json(TIMELINE_COLUMNS, timeline_rows),
            "summary.json": summary_text,
        }
    return {
        "receivers.csv": _csv_text(RECEIVER_COLUMNS, receiver_rows),
        "requests.csv": _csv_text(REQUEST_COLUMNS, request_rows),
        "timeline.csv": _csv_text(TIMELINE_COLUMNS, timeline_rows),
        "summary.json": summary_text,
    }


def parse_files(files: dict[str, str]) -> MetricsReport:
    """Rebuild a report from emitted CSV text (receiver names stay strings
    unless they are plain indices; group peaks are not recoverable)."""
    report = MetricsReport()
    for row in csv.DictReader(io.StringIO(files["receivers.csv"])):
        receiver = int(row["receiver"]) if row["receiver"].isdigit() else -1
        report.receivers.append(ReceiverRecord(
            int(row["request_id"]), receiver, int(row["arrival_slot"]),
            int(row["completion_slot"]), int(row["partition_id"]),
            int(row["partition_size"]), int(row["rank"])))
    for row in csv.DictReader(io.StringIO(files["requests.csv"])):
        report.requests.append(RequestRecord(
            int(row["request_id"]), float(row["volume"]), int(row["n_partitions"]),
            float(row["bandwidth"]), float(row["budget_weight_sum"]),
            float(row["single_tree_weight"])))
    for row in csv.DictReader(io.StringIO(files["timeline.csv"])):
        report.timeline.append(TimelineRecord(
            int(row["slot"]), float(row["delivered_volume"]),
            int(row["active_partitions"]), int(row["max_group_entries"])))
    return report
