"""Per-edge load and utilization bookkeeping plus edge-weight strategies.

An edge's load is the outstanding committed volume crossing it scaled by
the inverse of its capacity; utilization is the fraction of capacity that
was allocated in the most recent completed timeslot (0 before any
allocation). Ten weight strategies ("w1".."w10") turn this state into edge
weights for tree selection; "w6" (load plus the new transfer's volume over
capacity) is the default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

from .errors import SimulationError
from .steiner import ForwardingTree
from .topology import Topology

# exp() argument clamp: keeps w3 finite on extreme loads without reordering
# any realistically reachable values
_EXP_CLAMP = 700.0
_NEGATIVE_LOAD_TOL = 1e-6


class WeightStrategy(str, Enum):
    W1 = "w1"
    W2 = "w2"
    W3 = "w3"
    W4 = "w4"
    W5 = "w5"
    W6 = "w6"
    W7 = "w7"
    W8 = "w8"
    W9 = "w9"
    W10 = "w10"

    @classmethod
    def parse(cls, value: "WeightStrategy | str") -> "WeightStrategy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown weight strategy {value!r}; "
                             f"expected one of {[m.value for m in cls]}") from None


DEFAULT_STRATEGY = WeightStrategy.W6


@dataclass(frozen=True)
class GlobalSums:
    """Whole-network terms needed by the normalized strategies (w7-w10)."""

    util_sum: float
    load_sum: float
    exp_util_sum: float
    load_max: float
    exp_load_shifted_sum: float  # sum of exp(L_e - load_max)


class LinkState:
    """Mutable per-edge state owned by a single simulation run."""

    def __init__(self, topo: Topology):
        self.topo = topo
        self.capacity = topo.capacities  # read-only view
        self.load = np.zeros(topo.num_edges, dtype=np.float64)
        self.utilization = np.zeros(topo.num_edges, dtype=np.float64)

    def commit_tree(self, tree: ForwardingTree, volume: float) -> None:
        """Add volume/C_e of load to every edge of a newly installed tree."""
        if volume <= 0:
            raise ValueError("committed volume must be > 0")
        for e in tree.edges:
            self.load[e] += volume / self.capacity[e]

    def drain_tree(self, tree: ForwardingTree, delivered: float) -> None:
        """Remove delivered/C_e of load from every edge of a tree."""
        for e in tree.edges:
            self.load[e] -= delivered / self.capacity[e]
        self._clamp_negative()

    def drain_flat(self, flat_edges: np.ndarray, delivered_per_entry: np.ndarray) -> None:
        """Vectorized drain over concatenated per-tree edge arrays."""
        if len(flat_edges) == 0:
            return
        np.subtract.at(self.load, flat_edges,
                       delivered_per_entry / self.capacity[flat_edges])
        self._clamp_negative()

    def sync_outstanding(self, flat_edges: np.ndarray,
                         residual_per_entry: np.ndarray) -> None:
        """Rebuild loads from the outstanding residuals crossing each edge.

        Incremental drains round once per flow per slot; resynchronizing at
        slot boundaries keeps that rounding from accumulating over long runs.
        """
        volume = np.zeros(self.topo.num_edges, dtype=np.float64)
        if len(flat_edges):
            np.add.at(volume, flat_edges, residual_per_entry)
        self.load = volume / self.capacity

    def _clamp_negative(self) -> None:
        low = self.load.min(initial=0.0)
        if low < -_NEGATIVE_LOAD_TOL:
            raise SimulationError(f"edge load went negative ({low}); "
                                  "commit/drain bookkeeping is inconsistent")
        if low < 0.0:
            np.maximum(self.load, 0.0, out=self.load)

    def set_utilization(self, allocated_rates: np.ndarray) -> None:
        """Record per-edge utilization for the timeslot that just ended."""
        self.utilization = np.clip(allocated_rates / self.capacity, 0.0, 1.0)


def link_load(state: LinkState, edge: int, partitions: Iterable) -> float:
    """Recompute one edge's load from partition residuals (the definition)."""
    total = 0.0
    for p in partitions:
        if edge in p.tree.edges:
            total += p.residual
    return total / float(state.capacity[edge])


def recompute_loads(state: LinkState, partitions: Iterable) -> np.ndarray:
    """Full per-edge load recomputation from partition residuals."""
    load = np.zeros(state.topo.num_edges, dtype=np.float64)
    for p in partitions:
        for e in p.tree.edges:
            load[e] += p.residual
    return load / state.capacity


def check_load_consistency(state: LinkState, partitions: Iterable,
                           tol: float = 1e-9) -> None:
    """Assert incremental loads match the recomputed definition."""
    expected = recompute_loads(state, partitions)
    gap = float(np.max(np.abs(expected - state.load), initial=0.0))
    if gap > tol:
        raise SimulationError(f"incremental load drifted {gap} from recomputation")


def global_sums(state: LinkState) -> GlobalSums:
    util = state.utilization
    load = state.load
    load_max = float(load.max(initial=0.0))
    return GlobalSums(
        util_sum=float(util.sum()),
        load_sum=float(load.sum()),
        exp_util_sum=float(np.exp(util).sum()),
        load_max=load_max,
        exp_load_shifted_sum=float(np.exp(load - load_max).sum()),
    )


def edge_weight(strategy: WeightStrategy, edge: int, state: LinkState,
                request_volume: float, sums: GlobalSums | None = None) -> float:
    """Evaluate one strategy on one edge (see weights_vector for all edges)."""
    strategy = WeightStrategy.parse(strategy)
    if sums is None:
        sums = global_sums(state)
    u = float(state.utilization[edge])
    load = float(state.load[edge])
    cap = float(state.capacity[edge])
    if strategy is WeightStrategy.W1:
        return 1.0
    if strategy is WeightStrategy.W2:
        return math.exp(u)
    if strategy is WeightStrategy.W3:
        return math.exp(min(load, _EXP_CLAMP))
    if strategy is WeightStrategy.W4:
        return u
    if strategy is WeightStrategy.W5:
        return load
    if strategy is WeightStrategy.W6:
        return load + request_volume / cap
    if strategy is WeightStrategy.W7:
        return 1.0 + math.exp(u) / sums.exp_util_sum
    if strategy is WeightStrategy.W8:
        return 1.0 + math.exp(load - sums.load_max) / sums.exp_load_shifted_sum
    if strategy is WeightStrategy.W9:
        if sums.util_sum <= 0.0:
            return 1.0
        return 1.0 + u / sums.util_sum
    if strategy is WeightStrategy.W10:
        if sums.load_sum <= 0.0:
            return 1.0
        return 1.0 + load / sums.load_sum
    raise AssertionError(strategy)


def weights_vector(strategy: WeightStrategy, state: LinkState,
                   request_volume: float) -> np.ndarray:
    """Strategy weights for every edge at once."""
    strategy = WeightStrategy.parse(strategy)
    util = state.utilization
    load = state.load
    if strategy is WeightStrategy.W1:
        return np.ones_like(load)
    if strategy is WeightStrategy.W2:
        return np.exp(util)
    if strategy is WeightStrategy.W3:
        return np.exp(np.minimum(load, _EXP_CLAMP))
    if strategy is WeightStrategy.W4:
        return util.copy()
    if strategy is WeightStrategy.W5:
        return load.copy()
    if strategy is WeightStrategy.W6:
        return load + request_volume / state.capacity
    sums = global_sums(state)
    if strategy is WeightStrategy.W7:
        return 1.0 + np.exp(util) / sums.exp_util_sum
    if strategy is WeightStrategy.W8:
        return 1.0 + np.exp(load - sums.load_max) / sums.exp_load_shifted_sum
    if strategy is WeightStrategy.W9:
        if sums.util_sum <= 0.0:
            return np.ones_like(util)
        return 1.0 + util / sums.util_sum
    if strategy is WeightStrategy.W10:
        if sums.load_sum <= 0.0:
            return np.ones_like(load)
        return 1.0 + load / sums.load_sum
    raise AssertionError(strategy)
