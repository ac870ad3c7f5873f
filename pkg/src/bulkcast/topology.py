"""Capacitated WAN graphs: loading, validation, normalization, hop distances.

Topology files are JSON objects with undirected links; the loader expands
each link into two directed edges and rescales all capacities by the maximum
raw capacity, so normalized capacities lie in (0, 1] with at least one edge
at exactly 1. Node identifiers are mapped to dense integer indices at load
and all downstream modules work with indices.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import TopologyError

BUNDLED_TOPOLOGIES = ("ans", "geant", "uninett")


@dataclass(frozen=True)
class Edge:
    """One directed edge; capacity is a fraction of the max raw capacity."""

    src: int
    dst: int
    capacity: float


class Topology:
    """Immutable directed graph with normalized link capacities.

    Instances are safe to share across concurrent runs; nothing mutates
    them after construction.
    """

    def __init__(self, name: str, capacity_unit: str, nodes: list[str],
                 edges: list[Edge], link_count: int):
        self.name = name
        self.capacity_unit = capacity_unit
        self.nodes = tuple(nodes)
        self.edges = tuple(edges)
        self.link_count = link_count
        self.num_nodes = len(self.nodes)
        self.num_edges = len(self.edges)
        self.capacities = np.array([e.capacity for e in self.edges], dtype=np.float64)
        self.capacities.setflags(write=False)
        self._edge_index = {(e.src, e.dst): i for i, e in enumerate(self.edges)}
        out: list[list[tuple[int, int]]] = [[] for _ in self.nodes]
        und: list[list[int]] = [[] for _ in self.nodes]
        for i, e in enumerate(self.edges):
            out[e.src].append((e.dst, i))
            und[e.src].append(e.dst)
        self.out_adj = tuple(tuple(sorted(lst)) for lst in out)
        self.und_adj = tuple(tuple(sorted(set(lst))) for lst in und)

    def node_index(self, name: str) -> int:
        try:
            return self.nodes.index(name)
        except ValueError:
            raise TopologyError(f"unknown node {name!r}") from None

    def edge_index(self, src: int, dst: int) -> int:
        try:
            return self._edge_index[(src, dst)]
        except KeyError:
            raise TopologyError(f"no edge {src}->{dst}") from None

    def to_json(self) -> str:
        """Serialize in the topology file format (normalized capacities)."""
        links = [{"a": self.nodes[e.src], "b": self.nodes[e.dst], "capacity": e.capacity}
                 for e in self.edges[::2]]
        doc = {
            "name": self.name,
            "capacity_unit": "normalized",
            "nodes": list(self.nodes),
            "links": links,
        }
        return json.dumps(doc, indent=2) + "\n"

    def __repr__(self) -> str:
        return (f"Topology({self.name!r}, nodes={self.num_nodes}, "
                f"links={self.link_count})")


def load_topology(source_text: str) -> Topology:
    """Parse and validate a topology file, returning a normalized Topology.

    Raises TopologyError naming the offending element on parse failures,
    dangling node references, self-loops, duplicate or non-positive-capacity
    links, and disconnected graphs.
    """
    try:
        doc = json.loads(source_text)
    except json.JSONDecodeError as exc:
        raise TopologyError(f"topology parse failure: {exc}") from exc
    if not isinstance(doc, dict):
        raise TopologyError("topology file must be a JSON object")
    for key in ("nodes", "links"):
        if key not in doc:
            raise TopologyError(f"topology file missing {key!r}")
    name = str(doc.get("name", "unnamed"))
    unit = str(doc.get("capacity_unit", "unitless"))
    nodes = doc["nodes"]
    if not isinstance(nodes, list) or not nodes or not all(isinstance(n, str) for n in nodes):
        raise TopologyError("'nodes' must be a non-empty list of strings")
    if len(set(nodes)) != len(nodes):
        dupes = sorted({n for n in nodes if nodes.count(n) > 1})
        raise TopologyError(f"duplicate node names: {dupes}")
    index = {n: i for i, n in enumerate(nodes)}

    links = doc["links"]
    if not isinstance(links, list) or not links:
        raise TopologyError("'links' must be a non-empty list")
    raw: list[tuple[int, int, float]] = []
    seen_pairs: set[tuple[int, int]] = set()
    for pos, link in enumerate(links):
        where = f"link {pos}"
        if not isinstance(link, dict) or not {"a", "b", "capacity"} <= set(link):
            raise TopologyError(f"{where}: expected object with 'a', 'b', 'capacity'")
        for end in ("a", "b"):
            if link[end] not in index:
                raise TopologyError(f"{where}: references unknown node {link[end]!r}")
        a, b = index[link["a"]], index[link["b"]]
        if a == b:
            raise TopologyError(f"{where}: self-loop at node {link['a']!r}")
        pair = (min(a, b), max(a, b))
        if pair in seen_pairs:
            raise TopologyError(f"{where}: duplicate link {link['a']!r}--{link['b']!r}")
        seen_pairs.add(pair)
        cap = link["capacity"]
        if not isinstance(cap, (int, float)) or not np.isfinite(cap) or cap <= 0:
            raise TopologyError(f"{where}: capacity must be finite and > 0, got {cap!r}")
        raw.append((a, b, float(cap)))

    max_cap = max(c for _, _, c in raw)
    edges: list[Edge] = []
    for a, b, cap in raw:
        norm = cap / max_cap
        edges.append(Edge(a, b, norm))
        edges.append(Edge(b, a, norm))

    topo = Topology(name, unit, list(nodes), edges, link_count=len(raw))
    _check_connected(topo)
    return topo


def load_bundled(name: str) -> Topology:
    """Load one of the topologies shipped with the package."""
    if name not in BUNDLED_TOPOLOGIES:
        raise TopologyError(
            f"unknown bundled topology {name!r}; available: {list(BUNDLED_TOPOLOGIES)}")
    text = resources.files("bulkcast.data").joinpath(f"{name}.json").read_text("utf-8")
    return load_topology(text)


def _check_connected(topo: Topology) -> None:
    seen = _bfs_levels(topo, 0)
    missing = [topo.nodes[i] for i, d in enumerate(seen) if d < 0]
    if missing:
        raise TopologyError(f"graph is disconnected; unreachable nodes: {missing}")


def _bfs_levels(topo: Topology, start: int) -> list[int]:
    dist = [-1] * topo.num_nodes
    dist[start] = 0
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in topo.und_adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def hop_distances(topo: Topology) -> np.ndarray:
    """All-pairs hop counts on the undirected view (symmetric int matrix)."""
    n = topo.num_nodes
    mat = np.zeros((n, n), dtype=np.int32)
    for s in range(n):
        mat[s, :] = _bfs_levels(topo, s)
    return mat


def min_hop_path(topo: Topology, src: int, dst: int) -> list[int]:
    """Edge indices of a minimum-hop directed path src -> dst.

    Deterministic: BFS visits neighbors in ascending node order, so ties
    resolve to the lexicographically smallest parent chain.
    """
    if src == dst:
        return []
    parent_edge = [-1] * topo.num_nodes
    seen = [False] * topo.num_nodes
    seen[src] = True
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            break
        for v, eidx in topo.out_adj[u]:
            if not seen[v]:
                seen[v] = True
                parent_edge[v] = eidx
                queue.append(v)
    if not seen[dst]:
        raise TopologyError(f"no path from node {src} to node {dst}")
    path: list[int] = []
    node = dst
    while node != src:
        eidx = parent_edge[node]
        path.append(eidx)
        node = topo.edges[eidx].src
    path.reverse()
    return path
