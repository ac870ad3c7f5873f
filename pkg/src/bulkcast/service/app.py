"""HTTP facade over the simulator: stateless run/sweep/workload endpoints.

Domain validation failures map to 400, unknown bundled topologies to 404,
and internal consistency violations surface as 500 so clients can tell
bad input from simulator bugs apart.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from .. import __version__
from ..engine import SimConfig
from ..errors import ConfigError, TopologyError
from ..experiments import run_sweep, run_variant
from ..load_model import WeightStrategy
from ..topology import BUNDLED_TOPOLOGIES, Topology, load_bundled, load_topology
from ..workload import (TransferRequest, WorkloadSpec, generate_workload,
                        workload_base_hash, workload_hash)
from .models import (RunRequest, RunResponse, SweepRequest, SweepResponse,
                     TopologyInfo, TopologyModel, TransferModel, VariantModel,
                     WorkloadRequest, WorkloadResponse)


def _resolve_topology(ref) -> Topology:
    if isinstance(ref, str):
        if ref not in BUNDLED_TOPOLOGIES:
            raise HTTPException(
                status_code=404,
                detail=f"unknown bundled topology {ref!r}; "
                       f"available: {list(BUNDLED_TOPOLOGIES)}")
        return load_bundled(ref)
    doc = ref.model_dump()
    return load_topology(json.dumps(doc))


def _workload_spec(model) -> WorkloadSpec:
    return WorkloadSpec(
        distribution=model.distribution,
        mean_volume=model.mean_volume,
        arrival_rate=model.arrival_rate,
        receivers_per_transfer=model.receivers,
        transfers=model.transfers,
        seed=model.seed,
        pareto_shape=model.pareto_shape,
        min_volume=model.min_volume,
        max_volume=model.max_volume,
        cdf=tuple(tuple(p) for p in model.cdf) if model.cdf else None,
    )


def _sim_config(req: RunRequest) -> SimConfig:
    topo = _resolve_topology(req.topology)
    transfers = None
    if req.transfers is not None:
        transfers = [TransferRequest(
            id=t.id,
            source=topo.node_index(t.source),
            receivers=tuple(sorted(topo.node_index(r) for r in t.receivers)),
            volume=t.volume,
            arrival=t.arrival,
        ) for t in req.transfers]
    return SimConfig(
        topology=topo,
        workload=_workload_spec(req.workload),
        transfers=transfers,
        scheme=req.scheme,
        policy=req.policy,
        weight=WeightStrategy.parse(req.weight),
        pf=req.pf,
        n_max=None if req.nmax == "all" else int(req.nmax),
        delta=req.delta,
        debug_checks=req.debug_checks,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="bulkcast", version=__version__,
                  description="Bulk multicast transfer simulation service")

    @app.exception_handler(ConfigError)
    @app.exception_handler(TopologyError)
    async def _bad_input(request, exc):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/topologies", response_model=list[TopologyInfo])
    def topologies() -> list[TopologyInfo]:
        return [_info(load_bundled(name)) for name in BUNDLED_TOPOLOGIES]

    @app.get("/topologies/{name}", response_model=TopologyModel)
    def topology(name: str) -> TopologyModel:
        topo = _resolve_topology(name)
        doc = json.loads(topo.to_json())
        return TopologyModel(**doc)

    @app.post("/run", response_model=RunResponse)
    def run_simulation(req: RunRequest) -> RunResponse:
        config = _sim_config(req)
        result = run_variant(config, name="run")
        return RunResponse(summary=result.summary, files=result.files,
                           workload_hash=result.workload_hash,
                           workload_base_hash=result.workload_base_hash)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> SweepResponse:
        base = _sim_config(req.base)
        result = run_sweep(base, req.axis, req.values, workers=req.workers)
        return SweepResponse(
            axis=result.axis,
            variants=[VariantModel(
                name=v.name, summary=v.summary, files=v.files,
                workload_hash=v.workload_hash,
                workload_base_hash=v.workload_base_hash)
                for v in result.variants],
            comparison_csv=result.comparison_csv)

    @app.post("/workload", response_model=WorkloadResponse)
    def workload(req: WorkloadRequest) -> WorkloadResponse:
        topo = _resolve_topology(req.topology)
        spec = _workload_spec(req.workload)
        transfers = generate_workload(spec, topo, req.delta)
        rows = [TransferModel(
            id=t.id, source=topo.nodes[t.source],
            receivers=[topo.nodes[r] for r in t.receivers],
            volume=t.volume, arrival=t.arrival) for t in transfers]
        return WorkloadResponse(transfers=rows,
                                workload_hash=workload_hash(transfers),
                                workload_base_hash=workload_base_hash(transfers))

    return app


def _info(topo: Topology) -> TopologyInfo:
    return TopologyInfo(
        name=topo.name, nodes=topo.num_nodes, links=topo.link_count,
        min_capacity=float(topo.capacities.min()),
        max_capacity=float(topo.capacities.max()))
