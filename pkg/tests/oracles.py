"""Independent reference implementations used only to check the real ones.

Everything here is deliberately written with different data structures and
algorithms than the package (dense Floyd-Warshall instead of BFS, dict/set
water filling instead of vectorized arrays) so a shared bug is unlikely.
"""

from __future__ import annotations

import math


def floyd_warshall_hops(n_nodes: int, und_edges) -> list[list[float]]:
    """All-pairs hop counts from an undirected edge list."""
    dist = [[math.inf] * n_nodes for _ in range(n_nodes)]
    for i in range(n_nodes):
        dist[i][i] = 0
    for a, b in und_edges:
        dist[a][b] = 1
        dist[b][a] = 1
    for k in range(n_nodes):
        for i in range(n_nodes):
            dik = dist[i][k]
            if dik == math.inf:
                continue
            row_k = dist[k]
            row_i = dist[i]
            for j in range(n_nodes):
                alt = dik + row_k[j]
                if alt < row_i[j]:
                    row_i[j] = alt
    return dist


def waterfill_oracle(capacities, flow_edges, demands,
                     eps: float = 1e-12) -> list[float]:
    """Max-min fair rates with demand caps by exhaustive bottleneck search.

    At every stage, scan all edges for the tightest per-flow headroom and
    all flows for the smallest demand gap; raise everyone by the minimum,
    then retire whichever constraint bound.
    """
    n = len(flow_edges)
    rates = [0.0] * n
    active = {f for f in range(n) if demands[f] > eps}
    slack = list(capacities)
    guard = 0
    while active:
        guard += 1
        if guard > n + len(capacities) + 2:
            raise RuntimeError("oracle failed to converge")
        counts = {}
        for f in active:
            for e in set(flow_edges[f]):
                counts[e] = counts.get(e, 0) + 1
        edge_room = min((slack[e] / k for e, k in counts.items()), default=math.inf)
        demand_room = min(demands[f] - rates[f] for f in active)
        inc = max(min(edge_room, demand_room), 0.0)
        for f in active:
            rates[f] += inc
        for e, k in counts.items():
            slack[e] -= inc * k
        saturated = {e for e, k in counts.items() if slack[e] <= 1e-9}
        done = set()
        for f in active:
            if demands[f] - rates[f] <= 1e-9:
                done.add(f)
            elif saturated & set(flow_edges[f]):
                done.add(f)
        if not done:
            raise RuntimeError("oracle made no progress")
        active -= done
    return [min(r, d) for r, d in zip(rates, demands)]


def is_max_min_optimal(capacities, flow_edges, demands, rates,
                       tol: float = 1e-6) -> bool:
    """No rate can rise without cutting an equal-or-smaller flow's rate.

    Certificate: every flow below its demand crosses a saturated edge on
    which it is (one of) the largest flows.
    """
    usage = [0.0] * len(capacities)
    for f, edges in enumerate(flow_edges):
        for e in set(edges):
            usage[e] += rates[f]
    for f, edges in enumerate(flow_edges):
        if rates[f] >= demands[f] - tol:
            continue
        bottleneck_found = False
        for e in set(edges):
            if capacities[e] - usage[e] > tol:
                continue
            biggest = max(rates[g] for g, ge in enumerate(flow_edges)
                          if e in set(ge))
            if rates[f] >= biggest - tol:
                bottleneck_found = True
                break
        if not bottleneck_found:
            return False
    return True
