import itertools
import random

import numpy as np
import pytest

from bulkcast import (LinkState, TransferRequest, allocate_max_min,
                      allocate_priority, apply_allocation, hop_distances)
from bulkcast.partition import PartitionState
from bulkcast.scheduling import check_allocation, max_min_rates
from bulkcast.steiner import ForwardingTree
from helpers import make_topo
from oracles import is_max_min_optimal, waterfill_oracle


def line_topology(capacities):
    """Chain with one link per capacity; forward edge i has index 2*i."""
    names = [f"n{i}" for i in range(len(capacities) + 1)]
    links = [(names[i], names[i + 1], c) for i, c in enumerate(capacities)]
    return make_topo(names, links)


def flow(topo, edge_ids, residual, rid=0, pid=0, arrival=0):
    tree = ForwardingTree(root=0, terminals=frozenset({topo.num_nodes - 1}),
                          edges=tuple(sorted(edge_ids)), weight=0.0)
    return PartitionState(request_id=rid, partition_id=pid,
                          receivers=tree.terminals, tree=tree,
                          residual=residual, arrival=arrival)


def test_two_branch_first_slot_rates(two_branch_topo):
    topo = two_branch_topo
    state = LinkState(topo)
    p1 = flow(topo, [topo.edge_index(0, 1), topo.edge_index(1, 2),
                     topo.edge_index(2, 4), topo.edge_index(2, 5)],
              residual=10.0, rid=0, pid=0)
    p2 = flow(topo, [topo.edge_index(0, 1), topo.edge_index(1, 3),
                     topo.edge_index(3, 6), topo.edge_index(3, 7)],
              residual=10.0, rid=0, pid=1)
    rates = allocate_max_min([p1, p2], state, delta=1.0)
    # capacities normalize by 10, so these are exactly (1, 9) in raw units
    assert rates[0] * 10 == 1.0
    assert rates[1] * 10 == 9.0


def test_symmetric_share_of_one_edge():
    topo = line_topology([1.0])
    state = LinkState(topo)
    flows = [flow(topo, [0], residual=1e9, rid=i) for i in range(2)]
    rates = allocate_max_min(flows, state, delta=1.0)
    assert list(rates) == [0.5, 0.5]


def test_demand_cap_limits_lone_flow():
    topo = line_topology([1.0])
    state = LinkState(topo)
    rates = allocate_max_min([flow(topo, [0], residual=0.3)], state, delta=1.0)
    assert rates[0] == pytest.approx(0.3)


def test_freed_demand_capacity_is_redistributed():
    topo = line_topology([1.0])
    state = LinkState(topo)
    flows = [flow(topo, [0], residual=0.1, rid=0),
             flow(topo, [0], residual=100.0, rid=1)]
    rates = allocate_max_min(flows, state, delta=1.0)
    assert rates[0] == pytest.approx(0.1)
    assert rates[1] == pytest.approx(0.9)


def _random_instance(rng):
    n_edges = rng.randint(1, 6)
    caps = [rng.uniform(0.2, 3.0) for _ in range(n_edges)]
    n_flows = rng.randint(1, 5)
    flows = [sorted(rng.sample(range(n_edges),
                               rng.randint(1, n_edges))) for _ in range(n_flows)]
    demands = [rng.uniform(0.05, 4.0) for _ in range(n_flows)]
    return caps, flows, demands


def _rates_via_package(caps, flows, demands):
    capacity = np.array(caps)
    flat = np.concatenate([np.array(f, dtype=np.intp) for f in flows])
    flow_of = np.repeat(np.arange(len(flows), dtype=np.intp),
                        [len(f) for f in flows])
    return max_min_rates(capacity, flat, flow_of, len(flows),
                         np.array(demands, dtype=np.float64))


def test_max_min_matches_oracle_on_random_instances():
    rng = random.Random(2024)
    for _ in range(300):
        caps, flows, demands = _random_instance(rng)
        got = _rates_via_package(caps, flows, demands)
        expected = waterfill_oracle(caps, flows, demands)
        np.testing.assert_allclose(got, expected, atol=1e-9)
        assert is_max_min_optimal(caps, flows, demands, got)
        # capacity feasibility
        usage = [0.0] * len(caps)
        for f, edges in enumerate(flows):
            for e in edges:
                usage[e] += got[f]
        for e, c in enumerate(caps):
            assert usage[e] <= c + 1e-9
        for f, d in enumerate(demands):
            assert got[f] <= d + 1e-9


def test_work_conservation_under_fair_sharing():
    rng = random.Random(31)
    for _ in range(200):
        caps, flows, demands = _random_instance(rng)
        rates = _rates_via_package(caps, flows, demands)
        usage = [0.0] * len(caps)
        for f, edges in enumerate(flows):
            for e in edges:
                usage[e] += rates[f]
        for f, edges in enumerate(flows):
            slack_everywhere = all(caps[e] - usage[e] > 1e-9 for e in edges)
            if slack_everywhere:
                assert rates[f] == pytest.approx(demands[f], abs=1e-9)


def test_srpt_strict_priority():
    topo = line_topology([1.0])
    state = LinkState(topo)
    flows = [flow(topo, [0], residual=10.0, rid=0),
             flow(topo, [0], residual=5.0, rid=1)]
    rates = allocate_priority(flows, state, delta=1.0, order="srpt")
    assert list(rates) == [0.0, 1.0]


def test_fcfs_disjoint_trees_both_run():
    topo = line_topology([1.0, 0.5])
    state = LinkState(topo)
    flows = [flow(topo, [0], residual=50.0, rid=0, arrival=0),
             flow(topo, [2], residual=50.0, rid=1, arrival=3)]
    rates = allocate_priority(flows, state, delta=1.0, order="fcfs")
    assert list(rates) == [1.0, 0.5]


def test_fcfs_earlier_arrival_wins():
    topo = line_topology([1.0])
    state = LinkState(topo)
    flows = [flow(topo, [0], residual=50.0, rid=0, arrival=2),
             flow(topo, [0], residual=50.0, rid=1, arrival=1)]
    rates = allocate_priority(flows, state, delta=1.0, order="fcfs")
    assert list(rates) == [0.0, 1.0]


def test_priority_ties_resolve_by_ids_not_input_order():
    topo = line_topology([1.0])
    state = LinkState(topo)
    base = [flow(topo, [0], residual=5.0, rid=0, pid=0, arrival=0),
            flow(topo, [0], residual=5.0, rid=1, pid=0, arrival=0),
            flow(topo, [0], residual=5.0, rid=2, pid=0, arrival=0)]
    for order in ("srpt", "fcfs"):
        reference = None
        for perm in itertools.permutations(base):
            rates = allocate_priority(list(perm), state, delta=1.0, order=order)
            by_id = {p.request_id: r for p, r in zip(perm, rates)}
            if reference is None:
                reference = by_id
            assert by_id == reference
        assert reference[0] == 1.0  # smallest request id wins the tie


def test_all_policies_respect_capacity_on_random_instances():
    rng = random.Random(404)
    for _ in range(100):
        caps = [rng.uniform(0.2, 2.0) for _ in range(rng.randint(1, 5))]
        topo = line_topology(caps)
        state = LinkState(topo)
        flows = []
        for i in range(rng.randint(1, 6)):
            edge_ids = [2 * e for e in rng.sample(range(len(caps)),
                                                  rng.randint(1, len(caps)))]
            flows.append(flow(topo, edge_ids, residual=rng.uniform(0.1, 5.0),
                              rid=i, arrival=rng.randrange(4)))
        for policy in ("maxmin", "srpt", "fcfs"):
            if policy == "maxmin":
                rates = allocate_max_min(flows, state, delta=1.0)
            else:
                rates = allocate_priority(flows, state, delta=1.0, order=policy)
            check_allocation(flows, rates, state, delta=1.0)


def test_apply_allocation_decrements_and_completes():
    topo = line_topology([1.0])
    state = LinkState(topo)
    p = flow(topo, [0], residual=10.0)
    state.commit_tree(p.tree, 10.0)
    delivered, done = apply_allocation([p], np.array([1.0]), state,
                                       delta=1.0, slot=0)
    assert delivered[0] == 1.0
    assert p.residual == 9.0 and not p.completed and not done

    q = flow(topo, [0], residual=1.0, rid=1)
    state2 = LinkState(topo)
    state2.commit_tree(q.tree, 1.0)
    delivered, done = apply_allocation([q], np.array([1.0]), state2,
                                       delta=1.0, slot=7)
    assert q.completed and done == [q]
    assert q.completion_slot == 8
    assert q.residual == 0.0
    assert state2.load[0] == pytest.approx(0.0)


def test_apply_allocation_sets_utilization():
    topo = line_topology([1.0, 1.0])
    state = LinkState(topo)
    p = flow(topo, [0], residual=5.0)
    state.commit_tree(p.tree, 5.0)
    apply_allocation([p], np.array([1.0]), state, delta=1.0, slot=0)
    assert state.utilization[0] == 1.0
    assert state.utilization[2] == 0.0
