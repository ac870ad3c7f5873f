"""Small builders shared across test modules."""

from __future__ import annotations

import json
import random

from bulkcast import Topology, load_topology


def make_topo(nodes, links, name="test") -> Topology:
    """Build a topology from (a, b, capacity) triples."""
    doc = {
        "name": name,
        "capacity_unit": "unitless",
        "nodes": list(nodes),
        "links": [{"a": a, "b": b, "capacity": c} for a, b, c in links],
    }
    return load_topology(json.dumps(doc))


def random_connected_topology(rng: random.Random, n_nodes: int,
                              extra_links: int = 0,
                              cap_range=(0.5, 2.0)) -> Topology:
    """Random spanning tree plus extra links; always connected."""
    names = [f"n{i}" for i in range(n_nodes)]
    links = []
    pairs = set()
    for i in range(1, n_nodes):
        j = rng.randrange(i)
        links.append((names[j], names[i], rng.uniform(*cap_range)))
        pairs.add((j, i))
    attempts = 0
    while extra_links > 0 and attempts < 50 * extra_links:
        attempts += 1
        a, b = rng.randrange(n_nodes), rng.randrange(n_nodes)
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key in pairs:
            continue
        pairs.add(key)
        links.append((names[key[0]], names[key[1]], rng.uniform(*cap_range)))
        extra_links -= 1
    return make_topo(names, links)


def random_weights(rng: random.Random, topo: Topology, low=0.0, high=5.0):
    return [rng.uniform(low, high) for _ in range(topo.num_edges)]
