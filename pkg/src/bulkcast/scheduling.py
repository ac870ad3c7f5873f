"""Per-timeslot rate allocation over active forwarding trees.

Three policies: max-min fair sharing (progressive filling with demand
caps), and two strict-priority schemes, SRPT (smallest residual volume
first) and FCFS (earliest arrival first). Rates are in normalized capacity
units per timeslot; a tree's rate applies to every edge it crosses.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import SimulationError
from .load_model import LinkState, check_load_consistency
from .partition import PartitionState

RATE_EPS = 1e-12
FEAS_EPS = 1e-9

POLICIES = ("maxmin", "srpt", "fcfs")


def _flatten(active: Sequence[PartitionState]):
    arrays = [p.edge_array for p in active]
    flat_edges = np.concatenate(arrays) if arrays else np.zeros(0, dtype=np.intp)
    lens = np.array([len(a) for a in arrays], dtype=np.intp)
    flow_of = np.repeat(np.arange(len(active), dtype=np.intp), lens)
    return flat_edges, flow_of


def max_min_rates(capacity: np.ndarray, flat_edges: np.ndarray,
                  flow_of: np.ndarray, n_flows: int,
                  demands: np.ndarray) -> np.ndarray:
    """Progressive filling over a flow-edge incidence in flat form.

    All unfrozen flows rise together; a flow freezes when it meets its
    demand or when any edge it crosses saturates. Capacity freed by a
    demand-frozen flow keeps filling the rest within the same pass.
    """
    n_edges = len(capacity)
    rates = np.zeros(n_flows, dtype=np.float64)
    frozen = demands <= RATE_EPS
    for _ in range(n_flows + n_edges + 2):
        if frozen.all():
            break
        live = ~frozen[flow_of]
        k = np.bincount(flat_edges[live], minlength=n_edges)
        usage = np.bincount(flat_edges, weights=rates[flow_of], minlength=n_edges)
        slack = capacity - usage
        crossed = k > 0
        if crossed.any():
            edge_inc = float(np.min(slack[crossed] / k[crossed]))
        else:
            edge_inc = np.inf
        gaps = demands - rates
        gap_inc = float(np.min(gaps[~frozen]))
        inc = max(min(edge_inc, gap_inc), 0.0)
        rates[~frozen] += inc
        at_demand = ~frozen & (demands - rates <= FEAS_EPS)
        usage = np.bincount(flat_edges, weights=rates[flow_of], minlength=n_edges)
        saturated = crossed & (capacity - usage <= FEAS_EPS)
        blocked = np.zeros(n_flows, dtype=bool)
        if saturated.any():
            blocked_entries = saturated[flat_edges] & live
            blocked[np.unique(flow_of[blocked_entries])] = True
        newly = (at_demand | blocked) & ~frozen
        if not newly.any():
            raise SimulationError("progressive filling failed to converge")
        frozen |= newly
    else:
        raise SimulationError("progressive filling exceeded its round budget")
    np.minimum(rates, demands, out=rates)
    rates[rates < RATE_EPS] = 0.0
    return rates


def allocate_max_min(active: Sequence[PartitionState], state: LinkState,
                     delta: float) -> np.ndarray:
    """Max-min fair rates for the active partitions, capped by demand."""
    if not active:
        return np.zeros(0, dtype=np.float64)
    flat_edges, flow_of = _flatten(active)
    demands = np.array([p.residual for p in active], dtype=np.float64) / delta
    return max_min_rates(state.capacity, flat_edges, flow_of, len(active), demands)


def allocate_priority(active: Sequence[PartitionState], state: LinkState,
                      delta: float, order: str) -> np.ndarray:
    """Strict-priority rates: each flow in turn takes its bottleneck slack.

    order="fcfs" ranks by arrival slot, order="srpt" by residual volume;
    both break ties by request id then partition id.
    """
    if order not in ("fcfs", "srpt"):
        raise ValueError(f"unknown priority order {order!r}")
    if not active:
        return np.zeros(0, dtype=np.float64)
    if order == "fcfs":
        ranked = sorted(range(len(active)),
                        key=lambda i: (active[i].arrival, active[i].request_id,
                                       active[i].partition_id))
    else:
        ranked = sorted(range(len(active)),
                        key=lambda i: (active[i].residual, active[i].request_id,
                                       active[i].partition_id))
    remaining = state.capacity.copy()
    rates = np.zeros(len(active), dtype=np.float64)
    for i in ranked:
        p = active[i]
        cap = float(remaining[p.edge_array].min())
        rate = min(cap, p.residual / delta)
        if rate < RATE_EPS:
            continue
        rates[i] = rate
        remaining[p.edge_array] -= rate
    return rates


def allocate(policy: str, active: Sequence[PartitionState], state: LinkState,
             delta: float) -> np.ndarray:
    if policy == "maxmin":
        return allocate_max_min(active, state, delta)
    if policy in ("srpt", "fcfs"):
        return allocate_priority(active, state, delta, policy)
    raise ValueError(f"unknown policy {policy!r}")


def check_allocation(active: Sequence[PartitionState], rates: np.ndarray,
                     state: LinkState, delta: float) -> None:
    """Assert capacity and demand feasibility of an allocation."""
    usage = np.zeros(state.topo.num_edges, dtype=np.float64)
    for p, r in zip(active, rates):
        if r * delta > p.residual + FEAS_EPS:
            raise SimulationError(
                f"partition {p.request_id}/{p.partition_id} over-delivers")
        usage[p.edge_array] += r
    worst = float(np.max(usage - state.capacity, initial=0.0))
    if worst > FEAS_EPS:
        raise SimulationError(f"allocation exceeds capacity by {worst}")


def apply_allocation(active: Sequence[PartitionState], rates: np.ndarray,
                     state: LinkState, delta: float, slot: int,
                     debug: bool = False) -> tuple[np.ndarray, list[PartitionState]]:
    """Deliver one timeslot at the given rates.

    Decrements residuals, drains link loads, records per-edge utilization
    for the slot, and marks partitions whose residual empties as completed
    at the end of the slot. `active` must hold every incomplete partition:
    after the incremental drain (and its consistency check when debug is
    set), loads are resynchronized from the surviving residuals. Returns
    per-partition delivered volumes and the newly completed partitions.
    """
    if not active:
        state.set_utilization(np.zeros(state.topo.num_edges, dtype=np.float64))
        return np.zeros(0, dtype=np.float64), []
    residuals = np.array([p.residual for p in active], dtype=np.float64)
    delivered = np.minimum(rates * delta, residuals)
    flat_edges, flow_of = _flatten(active)
    state.drain_flat(flat_edges, delivered[flow_of])
    usage = np.bincount(flat_edges, weights=rates[flow_of],
                        minlength=state.topo.num_edges)
    state.set_utilization(usage)
    remaining = residuals - delivered
    completed = []
    for i, p in enumerate(active):
        p.residual = float(remaining[i])
        if p.residual <= FEAS_EPS:
            p.residual = 0.0
            remaining[i] = 0.0
            p.completed = True
            p.completion_slot = slot + 1
            completed.append(p)
    if debug:
        check_load_consistency(state, active)
    state.sync_outstanding(flat_edges, remaining[flow_of])
    return delivered, completed
