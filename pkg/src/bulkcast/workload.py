"""Synthetic transfer workloads: Poisson arrivals, several volume models.

Senders cycle round-robin over all nodes so every sender issues an equal
share of transfers; receivers are drawn uniformly without replacement from
the remaining nodes. Receiver draws use a per-transfer derived RNG stream,
so changing the receivers-per-transfer knob leaves arrival times, volumes,
and senders untouched (seed-paired comparisons stay paired).
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass

from .errors import ConfigError
from .topology import Topology

DISTRIBUTIONS = ("exponential", "pareto", "empirical")


@dataclass(frozen=True)
class TransferRequest:
    """One bulk multicast job: deliver `volume` from source to every receiver."""

    id: int
    source: int
    receivers: tuple[int, ...]
    volume: float
    arrival: int

    def __post_init__(self):
        if not self.receivers:
            raise ConfigError(f"transfer {self.id}: receiver set is empty")
        if len(set(self.receivers)) != len(self.receivers):
            raise ConfigError(f"transfer {self.id}: duplicate receivers")
        if self.source in self.receivers:
            raise ConfigError(f"transfer {self.id}: source is also a receiver")
        if self.volume <= 0:
            raise ConfigError(f"transfer {self.id}: volume must be > 0")
        if self.arrival < 0:
            raise ConfigError(f"transfer {self.id}: negative arrival slot")


@dataclass(frozen=True)
class WorkloadSpec:
    distribution: str = "exponential"
    mean_volume: float = 20.0      # in units of full timeslots
    arrival_rate: float = 1.0      # transfers per timeslot (Poisson)
    receivers_per_transfer: int = 4
    transfers: int = 200
    seed: int = 0
    pareto_shape: float | None = None   # default pins the pre-clamp mean to mean_volume
    min_volume: float = 2.0             # pareto clamp, full-timeslot units
    max_volume: float = 2000.0
    cdf: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ConfigError(f"unknown distribution {self.distribution!r}")
        if self.mean_volume <= 0 or self.arrival_rate <= 0:
            raise ConfigError("mean_volume and arrival_rate must be > 0")
        if self.receivers_per_transfer < 1:
            raise ConfigError("receivers_per_transfer must be >= 1")
        if self.transfers < 0:
            raise ConfigError("transfers must be >= 0")
        if self.distribution == "pareto":
            if not 0 < self.min_volume < self.max_volume:
                raise ConfigError("pareto clamp requires 0 < min_volume < max_volume")
            if self.mean_volume <= self.min_volume:
                raise ConfigError("pareto mean_volume must exceed min_volume")
        if self.distribution == "empirical":
            if not self.cdf:
                raise ConfigError("empirical distribution requires CDF points")
            object.__setattr__(self, "cdf", tuple((float(v), float(p)) for v, p in self.cdf))
            vols = [v for v, _ in self.cdf]
            probs = [p for _, p in self.cdf]
            if sorted(vols) != vols or sorted(probs) != probs:
                raise ConfigError("CDF points must ascend in both columns")
            if abs(probs[-1] - 1.0) > 1e-9:
                raise ConfigError("CDF must end at cumulative probability 1.0")
            if any(v <= 0 for v in vols):
                raise ConfigError("CDF volumes must be > 0")

    @property
    def effective_pareto_shape(self) -> float:
        if self.pareto_shape is not None:
            return self.pareto_shape
        return self.mean_volume / (self.mean_volume - self.min_volume)


def _sample_volume(spec: WorkloadSpec, rng: random.Random, delta: float) -> float:
    if spec.distribution == "exponential":
        return rng.expovariate(1.0 / (spec.mean_volume * delta))
    if spec.distribution == "pareto":
        shape = spec.effective_pareto_shape
        u = 1.0 - rng.random()  # in (0, 1]
        raw = spec.min_volume * delta * u ** (-1.0 / shape)
        return min(raw, spec.max_volume * delta)
    return _sample_cdf(spec.cdf, rng.random())


def _sample_cdf(cdf, u: float) -> float:
    prev_v, prev_p = cdf[0]
    if u <= prev_p:
        return prev_v
    for v, p in cdf[1:]:
        if u <= p:
            if p == prev_p:
                return v
            frac = (u - prev_p) / (p - prev_p)
            return prev_v + frac * (v - prev_v)
        prev_v, prev_p = v, p
    return cdf[-1][0]


def generate_workload(spec: WorkloadSpec, topo: Topology,
                      delta: float = 1.0) -> list[TransferRequest]:
    """Deterministically expand a workload spec into transfer requests."""
    n = topo.num_nodes
    if spec.receivers_per_transfer >= n:
        raise ConfigError(
            f"receivers_per_transfer={spec.receivers_per_transfer} is infeasible "
            f"on a {n}-node topology")
    arrival_rng = random.Random(f"{spec.seed}:arrivals")
    volume_rng = random.Random(f"{spec.seed}:volumes")
    transfers: list[TransferRequest] = []
    clock = 0.0
    for i in range(spec.transfers):
        clock += arrival_rng.expovariate(spec.arrival_rate)
        source = i % n
        volume = _sample_volume(spec, volume_rng, delta)
        recv_rng = random.Random(f"{spec.seed}:receivers:{i}")
        pool = [v for v in range(n) if v != source]
        receivers = tuple(sorted(recv_rng.sample(pool, spec.receivers_per_transfer)))
        transfers.append(TransferRequest(
            id=i, source=source, receivers=receivers,
            volume=volume, arrival=int(clock)))
    return transfers


def workload_to_json(transfers: list[TransferRequest], topo: Topology) -> str:
    rows = [{
        "id": t.id,
        "source": topo.nodes[t.source],
        "receivers": [topo.nodes[r] for r in t.receivers],
        "volume": t.volume,
        "arrival": t.arrival,
    } for t in transfers]
    return json.dumps({"topology": topo.name, "transfers": rows}, indent=2) + "\n"


def workload_from_json(text: str, topo: Topology) -> list[TransferRequest]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"workload parse failure: {exc}") from exc
    rows = doc["transfers"] if isinstance(doc, dict) else doc
    transfers = []
    for row in rows:
        transfers.append(TransferRequest(
            id=int(row["id"]),
            source=topo.node_index(row["source"]),
            receivers=tuple(sorted(topo.node_index(r) for r in row["receivers"])),
            volume=float(row["volume"]),
            arrival=int(row["arrival"]),
        ))
    return transfers


def parse_cdf_file(text: str) -> tuple[tuple[float, float], ...]:
    """Parse a two-column (volume, cumulative probability) CDF file."""
    points = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError(f"CDF line {lineno}: expected 'volume probability'")
        try:
            points.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ConfigError(f"CDF line {lineno}: non-numeric value") from None
    if not points:
        raise ConfigError("CDF file has no data points")
    return tuple(points)


def workload_hash(transfers: list[TransferRequest]) -> str:
    """Hash of the full workload (arrival, source, volume, receivers)."""
    blob = json.dumps([[t.id, t.source, list(t.receivers), t.volume, t.arrival]
                       for t in transfers], separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def workload_base_hash(transfers: list[TransferRequest]) -> str:
    """Hash ignoring receiver sets (stable across receiver-count sweeps)."""
    blob = json.dumps([[t.id, t.source, t.volume, t.arrival] for t in transfers],
                      separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
