"""Slotted-time simulation loop.

Each timeslot: admit the transfers arriving at that slot (partitioning and
tree installation depend on the scheme), allocate rates to every active
partition under the configured policy, deliver one slot of traffic, and
record metrics. A transfer arriving at slot t receives its first rates at
slot t; a partition whose residual empties during slot t completes at the
slot boundary t+1. The run ends when every admitted partition completes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, SimulationError
from .load_model import LinkState, WeightStrategy, weights_vector
from .metrics import (MetricsReport, ReceiverRecord, RequestRecord,
                      TimelineRecord, group_table_entries)
from .partition import (AdmissionInfo, PartitionState,
                        compute_partitions_and_trees)
from .scheduling import POLICIES, allocate, apply_allocation, check_allocation
from .steiner import ForwardingTree, min_weight_steiner_tree
from .topology import Topology, hop_distances, min_hop_path
from .workload import TransferRequest, WorkloadSpec, generate_workload

SCHEMES = ("quickcast", "single_tree", "unicast_minhop", "min_edge_steiner")


@dataclass
class SimConfig:
    topology: Topology
    workload: WorkloadSpec | None = None
    transfers: list[TransferRequest] | None = None
    scheme: str = "quickcast"
    policy: str = "maxmin"
    weight: WeightStrategy = WeightStrategy.W6
    pf: float = 1.1
    n_max: int | None = None  # None = one partition per receiver allowed
    delta: float = 1.0
    debug_checks: bool = False
    max_slots: int = 2_000_000

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected {SCHEMES}")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}; expected {POLICIES}")
        self.weight = WeightStrategy.parse(self.weight)
        if self.delta <= 0:
            raise ConfigError("delta must be > 0")
        if self.pf <= 0:
            raise ConfigError("pf must be > 0")
        if self.n_max is not None and self.n_max < 1:
            raise ConfigError("n_max must be >= 1 (or None for unbounded)")
        if self.workload is None and self.transfers is None:
            raise ConfigError("config needs a workload spec or explicit transfers")

    def echo(self) -> dict:
        doc = {
            "topology": self.topology.name,
            "scheme": self.scheme,
            "policy": self.policy,
            "weight": self.weight.value,
            "pf": self.pf,
            "n_max": "all" if self.n_max is None else self.n_max,
            "delta": self.delta,
        }
        if self.workload is not None:
            doc["workload"] = {
                "distribution": self.workload.distribution,
                "mean_volume": self.workload.mean_volume,
                "arrival_rate": self.workload.arrival_rate,
                "receivers_per_transfer": self.workload.receivers_per_transfer,
                "transfers": self.workload.transfers,
                "seed": self.workload.seed,
            }
        else:
            doc["workload"] = {"replayed_transfers": len(self.transfers or [])}
        return doc


class RunState:
    """One in-flight simulation; advance with step() until done."""

    def __init__(self, config: SimConfig):
        self.config = config
        topo = config.topology
        self.topo = topo
        self.link_state = LinkState(topo)
        self.hop = hop_distances(topo)
        if config.transfers is not None:
            transfers = sorted(config.transfers, key=lambda t: (t.arrival, t.id))
        else:
            transfers = generate_workload(config.workload, topo, config.delta)
        for t in transfers:
            for node in (t.source, *t.receivers):
                if not 0 <= node < topo.num_nodes:
                    raise ConfigError(f"transfer {t.id}: node index {node} out of range")
        self.transfers = transfers
        self.next_idx = 0
        self.active: list[PartitionState] = []
        self.slot = 0
        self.group_counts = np.zeros(topo.num_nodes, dtype=np.int64)
        self.group_peaks = np.zeros(topo.num_nodes, dtype=np.int64)
        self._partition_entries: dict[tuple[int, int], dict[int, int]] = {}
        self._cached_rates: np.ndarray | None = None
        self.report = MetricsReport(node_names=topo.nodes,
                                    config_echo=config.echo())

    @property
    def done(self) -> bool:
        return self.next_idx >= len(self.transfers) and not self.active

    def _rates_for_slot(self) -> np.ndarray:
        """Current rates, reusing the last allocation when it must still hold.

        Between active-set changes, rates depend on residuals only through
        demand caps; a binding cap empties the flow and so changes the set.
        The cache is therefore exact as long as every flow would outlast the
        slot at its cached rate; anything closer forces a fresh allocation
        (which also redistributes capacity freed by the finishing flow).
        SRPT re-ranks flows by residual every slot and is never cached.
        """
        cfg = self.config
        cached = self._cached_rates
        if cached is not None and cfg.policy != "srpt":
            margin = cached * cfg.delta
            if all(p.residual > m + 1e-9
                   for p, m in zip(self.active, margin)):
                return cached
        rates = allocate(cfg.policy, self.active, self.link_state, cfg.delta)
        self._cached_rates = rates
        return rates

    # ---- admission -------------------------------------------------------

    def _admit(self, request: TransferRequest) -> None:
        cfg = self.config
        if cfg.scheme == "quickcast":
            parts, info = compute_partitions_and_trees(
                request, self.topo, self.link_state, self.hop,
                cfg.pf, cfg.n_max, cfg.weight)
        elif cfg.scheme in ("single_tree", "min_edge_steiner"):
            if cfg.scheme == "single_tree":
                w = weights_vector(cfg.weight, self.link_state, request.volume)
            else:
                w = np.ones(self.topo.num_edges, dtype=np.float64)
            tree = min_weight_steiner_tree(self.topo, w, request.source,
                                           request.receivers)
            self.link_state.commit_tree(tree, request.volume)
            parts = [PartitionState(
                request_id=request.id, partition_id=0,
                receivers=frozenset(request.receivers), tree=tree,
                residual=request.volume, arrival=request.arrival)]
            info = AdmissionInfo(request.id, 1, tree.weight, tree.weight, 1)
        elif cfg.scheme == "unicast_minhop":
            parts = []
            total = 0.0
            for pid, recv in enumerate(sorted(request.receivers)):
                path = min_hop_path(self.topo, request.source, recv)
                tree = ForwardingTree(root=request.source,
                                      terminals=frozenset({recv}),
                                      edges=tuple(sorted(path)),
                                      weight=float(len(path)))
                self.link_state.commit_tree(tree, request.volume)
                parts.append(PartitionState(
                    request_id=request.id, partition_id=pid,
                    receivers=frozenset({recv}), tree=tree,
                    residual=request.volume, arrival=request.arrival))
                total += tree.weight
            info = AdmissionInfo(request.id, len(parts), total, total, len(parts))
        else:
            raise AssertionError(cfg.scheme)

        bandwidth = sum(p.tree.edge_count for p in parts) * request.volume
        self.report.requests.append(RequestRecord(
            request_id=request.id, volume=request.volume,
            n_partitions=info.n_partitions, bandwidth=bandwidth,
            budget_weight_sum=info.budget_weight_sum,
            single_tree_weight=info.single_tree_weight))
        for p in parts:
            entries = group_table_entries(p.tree, self.topo)
            self._partition_entries[(p.request_id, p.partition_id)] = entries
            for node in entries:
                self.group_counts[node] += 1
            self.active.append(p)

    # ---- slot advance ----------------------------------------------------

    def step(self) -> "RunState":
        """Advance exactly one timeslot (admit, allocate, deliver, record)."""
        if self.done:
            raise SimulationError("step() called on a finished run")
        if self.slot >= self.config.max_slots:
            raise SimulationError(f"run exceeded {self.config.max_slots} slots")
        cfg = self.config
        while (self.next_idx < len(self.transfers)
               and self.transfers[self.next_idx].arrival == self.slot):
            self._admit(self.transfers[self.next_idx])
            self._cached_rates = None
            self.next_idx += 1

        slot_group_max = int(self.group_counts.max(initial=0))
        np.maximum(self.group_peaks, self.group_counts, out=self.group_peaks)
        active_count = len(self.active)

        if self.active:
            rates = self._rates_for_slot()
            if cfg.debug_checks:
                check_allocation(self.active, rates, self.link_state, cfg.delta)
            delivered, completed = apply_allocation(
                self.active, rates, self.link_state, cfg.delta, self.slot,
                debug=cfg.debug_checks)
            if completed:
                self._cached_rates = None
            total_delivered = float(delivered.sum())
            if total_delivered <= 0.0:
                raise SimulationError(
                    f"no progress at slot {self.slot} with {active_count} "
                    "active partitions")
            for p in completed:
                self.active.remove(p)
                entries = self._partition_entries.pop((p.request_id, p.partition_id))
                for node in entries:
                    self.group_counts[node] -= 1
                for recv in sorted(p.receivers):
                    self.report.receivers.append(ReceiverRecord(
                        request_id=p.request_id, receiver=recv,
                        arrival_slot=p.arrival,
                        completion_slot=p.completion_slot,
                        partition_id=p.partition_id,
                        partition_size=len(p.receivers), rank=0))
        else:
            total_delivered = 0.0
            self.link_state.set_utilization(
                np.zeros(self.topo.num_edges, dtype=np.float64))

        self.report.timeline.append(TimelineRecord(
            slot=self.slot, delivered_volume=total_delivered,
            active_partitions=active_count,
            max_group_entries=slot_group_max))
        self.slot += 1
        return self

    def finalize(self) -> MetricsReport:
        """Assign per-request receiver ranks and attach group-table peaks."""
        by_request: dict[int, list[ReceiverRecord]] = {}
        for rec in self.report.receivers:
            by_request.setdefault(rec.request_id, []).append(rec)
        ranked: list[ReceiverRecord] = []
        for rid in sorted(by_request):
            rows = sorted(by_request[rid], key=lambda r: (r.duration, r.receiver))
            for rank, rec in enumerate(rows, start=1):
                ranked.append(replace(rec, rank=rank))
        self.report.receivers = ranked
        self.report.group_max_per_node = self.group_peaks
        return self.report


def run(config: SimConfig) -> MetricsReport:
    """Simulate until every transfer completes; returns the metrics report."""
    state = RunState(config)
    while not state.done:
        state.step()
    return state.finalize()
