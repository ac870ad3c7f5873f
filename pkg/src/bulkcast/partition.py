"""Receiver-set partitioning: hop-distance clustering plus a weight budget.

Receivers of a transfer are clustered bottom-up by average-linkage hop
distance, producing one candidate partitioning per hierarchy layer. Edge
weights are frozen on entry; scanning from the most partitions allowed
down to two, the first layer whose per-cluster tree weights sum to at most
pf times the single-tree weight wins. The winning clusters then get their
trees recomputed one at a time against live link loads (each commit shifts
the weights seen by the next), which is what actually lands in the network.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .load_model import LinkState, WeightStrategy, weights_vector
from .steiner import ForwardingTree, min_weight_steiner_tree
from .topology import Topology
from .workload import TransferRequest


@dataclass
class PartitionState:
    """One receiver partition with its committed tree and residual volume."""

    request_id: int
    partition_id: int
    receivers: frozenset[int]
    tree: ForwardingTree
    residual: float
    arrival: int
    completed: bool = False
    completion_slot: int | None = None
    edge_array: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.edge_array = np.array(self.tree.edges, dtype=np.intp)


@dataclass(frozen=True)
class ClusterHierarchy:
    """All layers of the agglomerative merge, from singletons to one cluster.

    layers[l] holds l clusters (sorted member tuples, ordered by smallest
    member); merges records the merged pairs from the bottom up.
    """

    layers: dict[int, tuple[tuple[int, ...], ...]]
    merges: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]


@dataclass(frozen=True)
class AdmissionInfo:
    """Bookkeeping for one admitted request, kept for metrics."""

    request_id: int
    n_partitions: int
    single_tree_weight: float
    budget_weight_sum: float
    accepted_layer: int


def build_hierarchy(receivers, dist: np.ndarray) -> ClusterHierarchy:
    """Average-linkage agglomerative clustering over hop distances.

    Ties merge the pair with the lexicographically smallest (min id, max id),
    where a cluster's id is its smallest member.
    """
    members = {r: (r,) for r in sorted(int(r) for r in receivers)}
    if not members:
        raise ConfigError("cannot cluster an empty receiver set")
    sizes = {r: 1 for r in members}
    # average pairwise distance between clusters, keyed (min id, max id)
    pair_dist: dict[tuple[int, int], float] = {}
    ids = sorted(members)
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            pair_dist[(a, b)] = float(dist[a][b])

    def layer_snapshot():
        return tuple(members[c] for c in sorted(members))

    layers = {len(members): layer_snapshot()}
    merges = []
    while len(members) > 1:
        best = min(pair_dist.items(), key=lambda kv: (kv[1], kv[0]))
        (a, b), _ = best
        merges.append((members[a], members[b]))
        merged = tuple(sorted(members[a] + members[b]))
        size_a, size_b = sizes[a], sizes[b]
        del members[b], sizes[b]
        members[a] = merged
        sizes[a] = size_a + size_b
        for other in list(members):
            if other == a:
                continue
            ka = (min(a, other), max(a, other))
            kb = (min(b, other), max(b, other))
            d = (size_a * pair_dist[ka] + size_b * pair_dist.pop(kb)) / (size_a + size_b)
            pair_dist[ka] = d
        del pair_dist[(a, b)]
        layers[len(members)] = layer_snapshot()
    return ClusterHierarchy(layers=layers, merges=tuple(merges))


def compute_partitions_and_trees(
    request: TransferRequest,
    topo: Topology,
    state: LinkState,
    hop: np.ndarray,
    pf: float,
    n_max: int | None,
    strategy: WeightStrategy,
) -> tuple[list[PartitionState], AdmissionInfo]:
    """Partition a request's receivers and install one tree per partition.

    n_max=None lifts the partition-count cap (anything up to one partition
    per receiver). Mutates `state` by committing the installed trees' loads.
    """
    if pf <= 0:
        raise ConfigError("pf must be > 0")
    receivers = frozenset(request.receivers)
    limit = len(receivers) if n_max is None else min(n_max, len(receivers))
    if limit < 1:
        raise ConfigError("n_max must be >= 1")

    frozen_w = weights_vector(strategy, state, request.volume)
    single_tree = min_weight_steiner_tree(topo, frozen_w, request.source, receivers)
    hierarchy = build_hierarchy(receivers, hop)

    accepted: tuple[int, tuple[tuple[int, ...], ...], float] | None = None
    for layer in range(limit, 1, -1):
        clusters = hierarchy.layers[layer]
        total = 0.0
        for cluster in clusters:
            t = min_weight_steiner_tree(topo, frozen_w, request.source,
                                        frozenset(cluster))
            total += t.weight
        if total <= pf * single_tree.weight:
            accepted = (layer, clusters, total)
            break

    if accepted is None:
        state.commit_tree(single_tree, request.volume)
        parts = [PartitionState(
            request_id=request.id, partition_id=0, receivers=receivers,
            tree=single_tree, residual=request.volume, arrival=request.arrival)]
        info = AdmissionInfo(
            request_id=request.id, n_partitions=1,
            single_tree_weight=single_tree.weight,
            budget_weight_sum=single_tree.weight, accepted_layer=1)
        return parts, info

    layer, clusters, budget_sum = accepted
    # larger partitions commit first and claim the lightly loaded edges
    order = sorted(clusters, key=lambda c: (-len(c), c[0]))
    parts = []
    for pid, cluster in enumerate(order):
        live_w = weights_vector(strategy, state, request.volume)
        tree = min_weight_steiner_tree(topo, live_w, request.source,
                                       frozenset(cluster))
        state.commit_tree(tree, request.volume)
        parts.append(PartitionState(
            request_id=request.id, partition_id=pid,
            receivers=frozenset(cluster), tree=tree,
            residual=request.volume, arrival=request.arrival))
    info = AdmissionInfo(
        request_id=request.id, n_partitions=len(parts),
        single_tree_weight=single_tree.weight,
        budget_weight_sum=budget_sum, accepted_layer=layer)
    return parts, info
