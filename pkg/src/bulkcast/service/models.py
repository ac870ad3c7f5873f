"""Request/response schemas for the HTTP service."""

from __future__ import annotations

from typing import Literal, Union

from pydantic import BaseModel, Field

Scheme = Literal["quickcast", "single_tree", "unicast_minhop", "min_edge_steiner"]
Policy = Literal["maxmin", "srpt", "fcfs"]
Weight = Literal["w1", "w2", "w3", "w4", "w5", "w6", "w7", "w8", "w9", "w10"]
Distribution = Literal["exponential", "pareto", "empirical"]
SweepAxis = Literal["pf", "policy", "scheme", "receivers", "weight"]


class LinkModel(BaseModel):
    a: str
    b: str
    capacity: float


class TopologyModel(BaseModel):
    name: str = "custom"
    capacity_unit: str = "unitless"
    nodes: list[str]
    links: list[LinkModel]


class TopologyInfo(BaseModel):
    name: str
    nodes: int
    links: int
    min_capacity: float  # normalized
    max_capacity: float


class WorkloadModel(BaseModel):
    distribution: Distribution = "exponential"
    mean_volume: float = 20.0
    arrival_rate: float = Field(default=1.0, gt=0)
    receivers: int = Field(default=4, ge=1)
    transfers: int = Field(default=200, ge=0)
    seed: int = 0
    pareto_shape: float | None = None
    min_volume: float = 2.0
    max_volume: float = 2000.0
    cdf: list[tuple[float, float]] | None = None


class TransferModel(BaseModel):
    id: int
    source: str
    receivers: list[str]
    volume: float
    arrival: int


class RunRequest(BaseModel):
    topology: Union[str, TopologyModel]
    scheme: Scheme = "quickcast"
    policy: Policy = "maxmin"
    weight: Weight = "w6"
    pf: float = Field(default=1.1, gt=0)
    nmax: Union[int, Literal["all"]] = "all"
    delta: float = Field(default=1.0, gt=0)
    workload: WorkloadModel = WorkloadModel()
    transfers: list[TransferModel] | None = None
    debug_checks: bool = False


class RunResponse(BaseModel):
    summary: dict
    files: dict[str, str]
    workload_hash: str
    workload_base_hash: str


class SweepRequest(BaseModel):
    base: RunRequest
    axis: SweepAxis
    values: list[Union[float, int, str]]
    workers: int = Field(default=1, ge=1)


class VariantModel(BaseModel):
    name: str
    summary: dict
    files: dict[str, str]
    workload_hash: str
    workload_base_hash: str


class SweepResponse(BaseModel):
    axis: str
    variants: list[VariantModel]
    comparison_csv: str


class WorkloadRequest(BaseModel):
    topology: Union[str, TopologyModel]
    workload: WorkloadModel = WorkloadModel()
    delta: float = Field(default=1.0, gt=0)


class WorkloadResponse(BaseModel):
    transfers: list[TransferModel]
    workload_hash: str
    workload_base_hash: str
