"""Directed Steiner trees under arbitrary non-negative edge weights.

The production path is a cheapest-path-growth heuristic guarded by a
shortest-path-union fallback: whichever of the two trees is lighter wins,
so the result is never worse than routing every terminal over its own
minimum-weight path. An exact solver for small instances backs the tests.

All tie-breaking prefers lower (src, dst) index pairs so identical inputs
always produce identical trees.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .errors import InstanceTooLargeError, TopologyError
from .topology import Topology

_INF = float("inf")


@dataclass(frozen=True)
class ForwardingTree:
    """An arborescence rooted at `root` reaching every terminal.

    `edges` holds sorted edge indices into the owning topology; `weight` is
    the sum of the selection-time weights of those edges.
    """

    root: int
    terminals: frozenset[int]
    edges: tuple[int, ...]
    weight: float

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def nodes(self, topo: Topology) -> set[int]:
        touched = {self.root}
        for e in self.edges:
            touched.add(topo.edges[e].src)
            touched.add(topo.edges[e].dst)
        return touched

    def out_degrees(self, topo: Topology) -> dict[int, int]:
        deg: dict[int, int] = {}
        for e in self.edges:
            s = topo.edges[e].src
            deg[s] = deg.get(s, 0) + 1
        return deg


def tree_weight(tree: ForwardingTree, weights: np.ndarray) -> float:
    """Sum of the given weights over the tree's edges."""
    w = np.asarray(weights, dtype=np.float64)
    if tree.edges and max(tree.edges) >= len(w):
        raise TopologyError(f"missing weight for edge {max(tree.edges)}")
    return float(sum(float(w[e]) for e in tree.edges))


def _dijkstra(topo: Topology, weights: np.ndarray, sources: set[int]):
    """Multi-source Dijkstra; ties prefer the lower (src, dst) parent edge."""
    n = topo.num_nodes
    dist = [_INF] * n
    parent = [-1] * n
    heap: list[tuple[float, int]] = []
    for s in sorted(sources):
        dist[s] = 0.0
        heapq.heappush(heap, (0.0, s))
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, eidx in topo.out_adj[u]:
            nd = d + float(weights[eidx])
            if nd < dist[v]:
                dist[v] = nd
                parent[v] = eidx
                heapq.heappush(heap, (nd, v))
            elif nd == dist[v] and parent[v] >= 0:
                e_new = topo.edges[eidx]
                e_old = topo.edges[parent[v]]
                if (e_new.src, e_new.dst) < (e_old.src, e_old.dst):
                    parent[v] = eidx
    return dist, parent


def _prune(topo: Topology, edge_set: set[int], root: int,
           terminals: frozenset[int]) -> set[int]:
    """Drop non-terminal leaves until every leaf is a terminal."""
    edges = set(edge_set)
    while True:
        out_count: dict[int, int] = {}
        in_edge: dict[int, int] = {}
        for e in edges:
            rec = topo.edges[e]
            out_count[rec.src] = out_count.get(rec.src, 0) + 1
            in_edge[rec.dst] = e
        removable = [in_edge[v] for v in in_edge
                     if out_count.get(v, 0) == 0 and v not in terminals]
        if not removable:
            return edges
        for e in removable:
            edges.discard(e)


def _finish(topo: Topology, edge_set: set[int], root: int,
            terminals: frozenset[int], weights: np.ndarray) -> ForwardingTree:
    pruned = _prune(topo, edge_set, root, terminals)
    edges = tuple(sorted(pruned))
    weight = float(sum(float(weights[e]) for e in edges))
    return ForwardingTree(root=root, terminals=terminals, edges=edges, weight=weight)


def shortest_path_union(topo: Topology, weights: np.ndarray, root: int,
                        terminals: frozenset[int]) -> ForwardingTree:
    """Union of minimum-weight root->terminal paths, pruned to a tree.

    Paths are taken from one shortest-path tree rooted at `root`, so the
    union is an arborescence by construction.
    """
    dist, parent = _dijkstra(topo, weights, {root})
    chosen: set[int] = set()
    for t in sorted(terminals):
        if dist[t] == _INF:
            raise TopologyError(f"terminal {t} unreachable from {root}")
        node = t
        while node != root:
            eidx = parent[node]
            chosen.add(eidx)
            node = topo.edges[eidx].src
    return _finish(topo, chosen, root, terminals, weights)


def _grow_tree(topo: Topology, weights: np.ndarray, root: int,
               terminals: frozenset[int]) -> ForwardingTree:
    """Cheapest-path growth: repeatedly attach the nearest missing terminal."""
    in_tree = {root}
    chosen: set[int] = set()
    remaining = set(terminals) - in_tree
    while remaining:
        dist, parent = _dijkstra(topo, weights, in_tree)
        best = min(remaining, key=lambda t: (dist[t], t))
        if dist[best] == _INF:
            raise TopologyError(f"terminal {best} unreachable from tree")
        node = best
        while node not in in_tree:
            eidx = parent[node]
            chosen.add(eidx)
            in_tree.add(node)
            remaining.discard(node)
            node = topo.edges[eidx].src
    return _finish(topo, chosen, root, terminals, weights)


def min_weight_steiner_tree(topo: Topology, weights, root: int,
                            terminals) -> ForwardingTree:
    """Low-weight directed Steiner tree from root to all terminals.

    Returns the lighter of the growth heuristic and the shortest-path-union
    fallback, so the result weight never exceeds the fallback's.
    """
    terminals = frozenset(int(t) for t in terminals)
    if not terminals:
        raise TopologyError("terminal set is empty")
    if root in terminals:
        raise TopologyError(f"root {root} may not be a terminal")
    for t in terminals | {root}:
        if not 0 <= t < topo.num_nodes:
            raise TopologyError(f"node index {t} out of range")
    w = np.asarray(weights, dtype=np.float64)
    if len(w) != topo.num_edges:
        raise TopologyError(f"expected {topo.num_edges} edge weights, got {len(w)}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise TopologyError("edge weights must be finite and >= 0")
    grown = _grow_tree(topo, w, root, terminals)
    union = shortest_path_union(topo, w, root, terminals)
    return union if union.weight < grown.weight else grown


def validate_forwarding_tree(topo: Topology, tree: ForwardingTree) -> None:
    """Raise ValueError if the tree violates any arborescence invariant."""
    in_edge: dict[int, int] = {}
    out_count: dict[int, int] = {}
    for e in tree.edges:
        rec = topo.edges[e]
        if rec.dst in in_edge:
            raise ValueError(f"node {rec.dst} has two incoming tree edges")
        in_edge[rec.dst] = e
        out_count[rec.src] = out_count.get(rec.src, 0) + 1
    if tree.root in in_edge:
        raise ValueError("root has an incoming tree edge")
    touched = tree.nodes(topo)
    for v in touched - {tree.root}:
        if v not in in_edge:
            raise ValueError(f"non-root node {v} has no incoming tree edge")
    # reachability from root (also rules out disconnected cycles)
    reach = {tree.root}
    frontier = [tree.root]
    adj: dict[int, list[int]] = {}
    for e in tree.edges:
        adj.setdefault(topo.edges[e].src, []).append(topo.edges[e].dst)
    while frontier:
        u = frontier.pop()
        for v in adj.get(u, ()):
            if v not in reach:
                reach.add(v)
                frontier.append(v)
    if reach != touched:
        raise ValueError("tree is not connected from its root")
    missing = tree.terminals - touched
    if missing:
        raise ValueError(f"terminals not covered: {sorted(missing)}")
    for v in touched:
        if out_count.get(v, 0) == 0 and v not in tree.terminals:
            raise ValueError(f"non-terminal leaf {v}")


def _subset_is_tree(topo: Topology, subset: tuple[int, ...], root: int,
                    terminals: frozenset[int]) -> bool:
    in_edge: dict[int, int] = {}
    touched = {root}
    for e in subset:
        rec = topo.edges[e]
        if rec.dst in in_edge or rec.dst == root:
            return False
        in_edge[rec.dst] = e
        touched.add(rec.src)
        touched.add(rec.dst)
    if touched - {root} != set(in_edge):
        return False
    if not terminals <= touched:
        return False
    adj: dict[int, list[int]] = {}
    out_count: dict[int, int] = {}
    for e in subset:
        rec = topo.edges[e]
        adj.setdefault(rec.src, []).append(rec.dst)
        out_count[rec.src] = out_count.get(rec.src, 0) + 1
    reach = {root}
    frontier = [root]
    while frontier:
        u = frontier.pop()
        for v in adj.get(u, ()):
            if v not in reach:
                reach.add(v)
                frontier.append(v)
    if reach != touched:
        return False
    for v in touched:
        if out_count.get(v, 0) == 0 and v not in terminals:
            return False
    return True


def _brute_force_by_edges(topo: Topology, weights: np.ndarray, root: int,
                          terminals: frozenset[int]) -> ForwardingTree | None:
    best: tuple[float, tuple[int, ...]] | None = None
    all_edges = range(topo.num_edges)
    for r in range(1, topo.num_edges + 1):
        for subset in itertools.combinations(all_edges, r):
            if not _subset_is_tree(topo, subset, root, terminals):
                continue
            w = float(sum(float(weights[e]) for e in subset))
            key = (w, subset)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    return ForwardingTree(root=root, terminals=terminals,
                          edges=best[1], weight=best[0])


def _brute_force_by_nodes(topo: Topology, weights: np.ndarray, root: int,
                          terminals: frozenset[int]) -> ForwardingTree | None:
    required = {root} | set(terminals)
    free = [v for v in range(topo.num_nodes) if v not in required]
    best: tuple[float, tuple[int, ...]] | None = None
    for mask in range(1 << len(free)):
        nodeset = set(required)
        for bit, v in enumerate(free):
            if mask >> bit & 1:
                nodeset.add(v)
        g = nx.DiGraph()
        g.add_nodes_from(nodeset)
        for i, e in enumerate(topo.edges):
            if e.src in nodeset and e.dst in nodeset and e.dst != root:
                g.add_edge(e.src, e.dst, weight=float(weights[i]), eidx=i)
        try:
            arb = nx.minimum_spanning_arborescence(g, attr="weight", preserve_attrs=True)
        except nx.NetworkXException:
            continue
        chosen = {data["eidx"] for _, _, data in arb.edges(data=True)}
        pruned = _prune(topo, chosen, root, terminals)
        edges = tuple(sorted(pruned))
        w = float(sum(float(weights[e]) for e in edges))
        key = (w, edges)
        if best is None or key < best:
            best = key
    if best is None:
        return None
    return ForwardingTree(root=root, terminals=terminals,
                          edges=best[1], weight=best[0])


def brute_force_steiner(topo: Topology, weights, root: int,
                        terminals) -> ForwardingTree:
    """Provably minimum-weight tree by exhaustive search (small instances).

    Accepts instances with at most 12 directed edges or at most 10 nodes;
    anything larger raises InstanceTooLargeError.
    """
    terminals = frozenset(int(t) for t in terminals)
    if not terminals or root in terminals:
        raise TopologyError("need a non-empty terminal set excluding the root")
    w = np.asarray(weights, dtype=np.float64)
    if topo.num_edges <= 12:
        result = _brute_force_by_edges(topo, w, root, terminals)
    elif topo.num_nodes <= 10:
        result = _brute_force_by_nodes(topo, w, root, terminals)
    else:
        raise InstanceTooLargeError(
            f"{topo.num_nodes} nodes / {topo.num_edges} edges exceeds the "
            "exhaustive-search guard (<= 10 nodes or <= 12 edges)")
    if result is None:
        raise TopologyError("no tree connects the root to all terminals")
    return result
