import math
import random

import numpy as np
import pytest

from bulkcast import LinkState, WeightStrategy, edge_weight, weights_vector
from bulkcast.errors import SimulationError
from bulkcast.load_model import (check_load_consistency, global_sums,
                                 link_load, recompute_loads)
from bulkcast.partition import PartitionState
from bulkcast.steiner import min_weight_steiner_tree
from helpers import make_topo, random_connected_topology


def path_topo():
    return make_topo(["a", "b", "c"], [("a", "b", 1), ("b", "c", 1)])


def make_partition(topo, rid, root, terminals, residual, arrival=0):
    tree = min_weight_steiner_tree(topo, np.ones(topo.num_edges), root, terminals)
    return PartitionState(request_id=rid, partition_id=0,
                          receivers=frozenset(terminals), tree=tree,
                          residual=residual, arrival=arrival)


def test_link_load_zero_without_partitions():
    topo = path_topo()
    state = LinkState(topo)
    assert link_load(state, 0, []) == 0.0


def test_link_load_sums_residuals_over_capacity():
    topo = path_topo()
    state = LinkState(topo)
    p1 = make_partition(topo, 0, 0, {2}, residual=100.0)
    p2 = make_partition(topo, 1, 0, {2}, residual=50.0)
    shared = topo.edge_index(0, 1)
    assert link_load(state, shared, [p1, p2]) == pytest.approx(150.0)


def test_commit_examples():
    topo = path_topo()
    state = LinkState(topo)
    p = make_partition(topo, 0, 0, {2}, residual=20.0)
    state.commit_tree(p.tree, 20.0)
    assert state.load[topo.edge_index(0, 1)] == pytest.approx(20.0)

    half = make_topo(["a", "b", "c"], [("a", "b", 2), ("b", "c", 1)])
    state2 = LinkState(half)  # b->c normalizes to 0.5
    p2 = make_partition(half, 0, 0, {2}, residual=20.0)
    state2.commit_tree(p2.tree, 20.0)
    assert state2.load[half.edge_index(1, 2)] == pytest.approx(40.0)


def test_sequential_commits_match_recomputation():
    topo = path_topo()
    state = LinkState(topo)
    p1 = make_partition(topo, 0, 0, {2}, residual=10.0)
    p2 = make_partition(topo, 1, 0, {2}, residual=5.0)
    state.commit_tree(p1.tree, 10.0)
    state.commit_tree(p2.tree, 5.0)
    np.testing.assert_allclose(state.load, recompute_loads(state, [p1, p2]),
                               atol=1e-12)


def test_drain_returns_to_precommit_and_guards_negative():
    topo = path_topo()
    state = LinkState(topo)
    p = make_partition(topo, 0, 0, {2}, residual=20.0)
    state.commit_tree(p.tree, 20.0)
    state.drain_tree(p.tree, 20.0)
    assert np.all(state.load == 0.0)
    with pytest.raises(SimulationError, match="negative"):
        state.drain_tree(p.tree, 1.0)


def test_utilization_full_when_allocations_meet_capacity():
    topo = path_topo()
    state = LinkState(topo)
    rates = np.zeros(topo.num_edges)
    rates[topo.edge_index(0, 1)] = 1.0
    state.set_utilization(rates)
    assert state.utilization[topo.edge_index(0, 1)] == 1.0
    assert state.utilization[topo.edge_index(1, 2)] == 0.0


def test_random_commit_drain_trace_stays_consistent():
    rng = random.Random(13)
    topo = random_connected_topology(rng, 8, extra_links=5)
    state = LinkState(topo)
    live = []
    for step in range(300):
        if live and rng.random() < 0.45:
            p = rng.choice(live)
            take = min(p.residual, rng.uniform(0.0, p.residual))
            state.drain_tree(p.tree, take)
            p.residual -= take
            if p.residual <= 1e-12:
                p.residual = 0.0
                live.remove(p)
        else:
            root = rng.randrange(topo.num_nodes)
            others = [v for v in range(topo.num_nodes) if v != root]
            term = set(rng.sample(others, rng.randint(1, 3)))
            vol = rng.uniform(1.0, 30.0)
            p = make_partition(topo, step, root, term, residual=vol)
            state.commit_tree(p.tree, vol)
            live.append(p)
        check_load_consistency(state, live, tol=1e-9)
        assert state.load.min() >= 0.0


def test_w1_is_one_everywhere(ans_topo):
    state = LinkState(ans_topo)
    state.load[:] = 7.5
    assert edge_weight(WeightStrategy.W1, 3, state, 12.0) == 1.0
    assert np.all(weights_vector(WeightStrategy.W1, state, 12.0) == 1.0)


def test_w6_direct_formula():
    topo = make_topo(["a", "b", "c"], [("a", "b", 2), ("b", "c", 1)])
    state = LinkState(topo)
    edge = topo.edge_index(0, 1)  # normalized capacity 1.0
    state.load[edge] = 5.0
    state.capacity = np.array(state.capacity, copy=True)
    state.capacity[edge] = 2.0  # exercise the formula with a raw-style capacity
    assert edge_weight(WeightStrategy.W6, edge, state, 10.0) == pytest.approx(10.0)


def test_w8_unloaded_uniform(ans_topo):
    state = LinkState(ans_topo)
    value = edge_weight(WeightStrategy.W8, 0, state, 1.0)
    assert value == pytest.approx(1.0 + 1.0 / ans_topo.num_edges)
    assert value == pytest.approx(1.02)


def test_per_edge_and_vectorized_weights_agree():
    rng = random.Random(3)
    topo = random_connected_topology(rng, 7, extra_links=4)
    state = LinkState(topo)
    state.load[:] = [rng.uniform(0, 8) for _ in range(topo.num_edges)]
    state.utilization[:] = [rng.random() for _ in range(topo.num_edges)]
    sums = global_sums(state)
    for strategy in WeightStrategy:
        vec = weights_vector(strategy, state, 4.0)
        for e in range(topo.num_edges):
            assert vec[e] == pytest.approx(
                edge_weight(strategy, e, state, 4.0, sums), rel=1e-12)


def test_expected_formula_values_against_math():
    rng = random.Random(31)
    topo = random_connected_topology(rng, 5, extra_links=2)
    state = LinkState(topo)
    loads = [rng.uniform(0, 3) for _ in range(topo.num_edges)]
    utils = [rng.random() for _ in range(topo.num_edges)]
    state.load[:] = loads
    state.utilization[:] = utils
    vol = 6.0
    exp_u = sum(math.exp(u) for u in utils)
    exp_l = sum(math.exp(x) for x in loads)
    for e in range(topo.num_edges):
        cap = float(state.capacity[e])
        assert edge_weight(WeightStrategy.W2, e, state, vol) == pytest.approx(math.exp(utils[e]))
        assert edge_weight(WeightStrategy.W3, e, state, vol) == pytest.approx(math.exp(loads[e]))
        assert edge_weight(WeightStrategy.W4, e, state, vol) == pytest.approx(utils[e])
        assert edge_weight(WeightStrategy.W5, e, state, vol) == pytest.approx(loads[e])
        assert edge_weight(WeightStrategy.W6, e, state, vol) == pytest.approx(loads[e] + vol / cap)
        assert edge_weight(WeightStrategy.W7, e, state, vol) == pytest.approx(1 + math.exp(utils[e]) / exp_u)
        assert edge_weight(WeightStrategy.W8, e, state, vol) == pytest.approx(1 + math.exp(loads[e]) / exp_l)
        assert edge_weight(WeightStrategy.W9, e, state, vol) == pytest.approx(1 + utils[e] / sum(utils))
        assert edge_weight(WeightStrategy.W10, e, state, vol) == pytest.approx(1 + loads[e] / sum(loads))


def test_w9_w10_zero_sum_guard():
    topo = path_topo()
    state = LinkState(topo)
    assert edge_weight(WeightStrategy.W9, 0, state, 1.0) == 1.0
    assert edge_weight(WeightStrategy.W10, 0, state, 1.0) == 1.0
    assert np.all(weights_vector(WeightStrategy.W9, state, 1.0) == 1.0)
    assert np.all(weights_vector(WeightStrategy.W10, state, 1.0) == 1.0)


def test_w5_w6_monotone_in_load():
    topo = path_topo()
    state = LinkState(topo)
    edge = topo.edge_index(0, 1)
    previous = {s: -1.0 for s in (WeightStrategy.W5, WeightStrategy.W6)}
    for load in (0.0, 0.5, 3.0, 10.0, 200.0):
        state.load[edge] = load
        for strategy in previous:
            value = edge_weight(strategy, edge, state, 5.0)
            assert value >= previous[strategy]
            previous[strategy] = value


def test_w6_orders_trees_by_edge_count_when_unloaded(ans_topo):
    # uniform capacity, zero load: w6 weight is proportional to edge count
    state = LinkState(ans_topo)
    vol = 20.0
    w = weights_vector(WeightStrategy.W6, state, vol)
    rng = random.Random(17)
    trees = []
    for _ in range(10):
        root = rng.randrange(ans_topo.num_nodes)
        others = [v for v in range(ans_topo.num_nodes) if v != root]
        terms = set(rng.sample(others, rng.randint(1, 5)))
        trees.append(min_weight_steiner_tree(ans_topo, w, root, terms))
    for t in trees:
        assert t.weight == pytest.approx(t.edge_count * vol)
    by_weight = sorted(trees, key=lambda t: t.weight)
    by_edges = sorted(trees, key=lambda t: t.edge_count)
    assert [t.edge_count for t in by_weight] == [t.edge_count for t in by_edges]


def test_strategy_parse_accepts_strings_and_rejects_junk():
    assert WeightStrategy.parse("W6") is WeightStrategy.W6
    assert WeightStrategy.parse(WeightStrategy.W2) is WeightStrategy.W2
    with pytest.raises(ValueError):
        WeightStrategy.parse("w11")


def test_strategy_value_ranges_on_random_states():
    # w1,w2,w3,w7..w10 stay strictly positive and finite; w4,w5 are >= 0;
    # w6 is at least the volume over capacity term
    rng = random.Random(71)
    positive = (WeightStrategy.W1, WeightStrategy.W2, WeightStrategy.W3,
                WeightStrategy.W7, WeightStrategy.W8, WeightStrategy.W9,
                WeightStrategy.W10)
    for _ in range(30):
        topo = random_connected_topology(rng, 6, extra_links=3)
        state = LinkState(topo)
        state.load[:] = [rng.choice((0.0, rng.uniform(0, 50), 1e4))
                         for _ in range(topo.num_edges)]
        state.utilization[:] = [rng.choice((0.0, rng.random()))
                                for _ in range(topo.num_edges)]
        vol = rng.uniform(0.5, 100.0)
        for strategy in positive:
            vec = weights_vector(strategy, state, vol)
            assert np.all(np.isfinite(vec)) and np.all(vec > 0)
        for strategy in (WeightStrategy.W4, WeightStrategy.W5):
            vec = weights_vector(strategy, state, vol)
            assert np.all(np.isfinite(vec)) and np.all(vec >= 0)
        w6 = weights_vector(WeightStrategy.W6, state, vol)
        assert np.all(w6 >= vol / np.asarray(state.capacity) - 1e-12)
        assert np.all(w6 > 0)
