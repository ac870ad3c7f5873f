"""Bulk multicast transfer simulation and traffic engineering for WANs."""

__version__ = "0.1.0"

from .engine import SCHEMES, SimConfig, RunState, run
from .errors import (BulkcastError, ConfigError, InstanceTooLargeError,
                     SimulationError, TopologyError)
from .load_model import LinkState, WeightStrategy, edge_weight, weights_vector
from .metrics import MetricsReport, emit_files, group_table_entries, summarize
from .partition import (ClusterHierarchy, PartitionState, build_hierarchy,
                        compute_partitions_and_trees)
from .scheduling import (POLICIES, allocate_max_min, allocate_priority,
                         apply_allocation)
from .steiner import (ForwardingTree, brute_force_steiner,
                      min_weight_steiner_tree, tree_weight)
from .topology import (BUNDLED_TOPOLOGIES, Edge, Topology, hop_distances,
                       load_bundled, load_topology, min_hop_path)
from .workload import TransferRequest, WorkloadSpec, generate_workload

__all__ = [
    "BulkcastError", "BUNDLED_TOPOLOGIES", "ClusterHierarchy", "ConfigError",
    "Edge", "ForwardingTree", "InstanceTooLargeError", "LinkState",
    "MetricsReport", "POLICIES", "PartitionState", "RunState", "SCHEMES",
    "SimConfig", "SimulationError", "Topology", "TopologyError",
    "TransferRequest", "WeightStrategy", "WorkloadSpec", "allocate_max_min",
    "allocate_priority", "apply_allocation", "brute_force_steiner",
    "build_hierarchy", "compute_partitions_and_trees", "edge_weight",
    "emit_files", "generate_workload", "group_table_entries", "hop_distances",
    "load_bundled", "load_topology", "min_hop_path", "min_weight_steiner_tree",
    "run", "summarize", "tree_weight", "weights_vector",
]
