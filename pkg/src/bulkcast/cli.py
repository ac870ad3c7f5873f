"""Command-line client for the simulation service.

The CLI only speaks HTTP: by default it drives an in-process instance of
the service, and with --server it targets a remote one, so single runs and
sweeps behave identically either way. Exit codes: 0 success, 2 invalid
configuration or input files, 3 simulator-side failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx

from .topology import BUNDLED_TOPOLOGIES
from .workload import parse_cdf_file

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SCHEME_CHOICES = ("quickcast", "single_tree", "unicast_minhop", "min_edge_steiner")
POLICY_CHOICES = ("maxmin", "srpt", "fcfs")
WEIGHT_CHOICES = tuple(f"w{i}" for i in range(1, 11))
AXIS_CHOICES = ("pf", "policy", "scheme", "receivers", "weight")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_CONFIG):
        super().__init__(message)
        self.code = code


def _open_client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeprecationWarning)
        from fastapi.testclient import TestClient

    from .service import create_app
    return TestClient(create_app(), raise_server_exceptions=False)


def _check(response) -> dict:
    if response.status_code >= 500:
        raise CliError(f"simulation failed: {_detail(response)}", EXIT_RUNTIME)
    if response.status_code >= 400:
        raise CliError(f"rejected request: {_detail(response)}", EXIT_CONFIG)
    return response.json()


def _detail(response) -> str:
    try:
        return str(response.json().get("detail", response.text))
    except Exception:
        return response.text


def _topology_payload(ref: str):
    """A bundled name passes through; anything else must be a readable file."""
    if ref in BUNDLED_TOPOLOGIES:
        return ref
    path = Path(ref)
    if not path.is_file():
        raise CliError(f"topology file not found: {path}")
    try:
        return json.loads(path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read topology {path}: {exc}") from exc


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.is_file():
        raise CliError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise CliError(f"config file {p} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CliError(f"config file {p} must hold a JSON object")
    return doc


def _build_run_request(args) -> dict:
    req = _load_config_file(args.config)
    workload = dict(req.get("workload", {}))

    def override(key, value):
        if value is not None:
            req[key] = value

    def wl_override(key, value):
        if value is not None:
            workload[key] = value

    override("scheme", args.scheme)
    override("policy", args.policy)
    override("weight", args.weight)
    override("pf", args.pf)
    override("delta", args.delta)
    override("debug_checks", args.debug_checks or None)
    if args.nmax is not None:
        req["nmax"] = args.nmax if args.nmax == "all" else int(args.nmax)
    if args.topology is not None:
        req["topology"] = args.topology
    if "topology" not in req:
        raise CliError("no topology given (use --topology or a config file)")
    if isinstance(req["topology"], str):
        req["topology"] = _topology_payload(req["topology"])

    wl_override("distribution", args.dist)
    wl_override("mean_volume", args.mean_volume)
    wl_override("arrival_rate", args.arrival_rate)
    wl_override("receivers", args.receivers)
    wl_override("transfers", args.transfers)
    wl_override("seed", args.seed)
    wl_override("pareto_shape", args.pareto_shape)
    wl_override("min_volume", args.min_volume)
    wl_override("max_volume", args.max_volume)
    if args.cdf_file:
        path = Path(args.cdf_file)
        if not path.is_file():
            raise CliError(f"CDF file not found: {path}")
        try:
            workload["cdf"] = [list(p) for p in parse_cdf_file(path.read_text("utf-8"))]
        except Exception as exc:
            raise CliError(f"cannot parse CDF file {path}: {exc}") from exc
    if workload:
        req["workload"] = workload

    if args.workload:
        path = Path(args.workload)
        if not path.is_file():
            raise CliError(f"workload file not found: {path}")
        try:
            doc = json.loads(path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise CliError(f"workload file {path} is not valid JSON: {exc}") from exc
        req["transfers"] = doc["transfers"] if isinstance(doc, dict) else doc
    return req


def _write_files(outdir: Path, files: dict[str, str]) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (outdir / name).write_text(text, encoding="utf-8")


def _print_summary(summary: dict) -> None:
    comp = summary.get("completion")
    if comp:
        print(f"receivers={summary['receivers']} requests={summary['requests']} "
              f"mean={comp['mean']:.3f} median={comp['median']:.3f} "
              f"p95={comp['p95']:.3f} bandwidth={summary['total_bandwidth']:.3f} "
              f"makespan={summary['makespan_slots']}")
    else:
        print("empty run (no receivers)")


def cmd_run(args) -> int:
    req = _build_run_request(args)
    with _open_client(args.server) as client:
        payload = _check(client.post("/run", json=req))
    outdir = Path(args.out)
    _write_files(outdir, payload["files"])
    _print_summary(payload["summary"])
    print(f"wrote {', '.join(sorted(payload['files']))} to {outdir}")
    return EXIT_OK


def _coerce_axis_values(axis: str, values: list[str]) -> list:
    if axis == "pf":
        return [float(v) for v in values]
    if axis == "receivers":
        return [int(v) for v in values]
    return list(values)


def cmd_sweep(args) -> int:
    base = _build_run_request(args)
    try:
        values = _coerce_axis_values(args.axis, args.values)
    except ValueError as exc:
        raise CliError(f"bad sweep value for axis {args.axis}: {exc}") from exc
    req = {"base": base, "axis": args.axis, "values": values,
           "workers": args.workers}
    with _open_client(args.server) as client:
        payload = _check(client.post("/sweep", json=req))
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "comparison.csv").write_text(payload["comparison_csv"], "utf-8")
    for variant in payload["variants"]:
        _write_files(outdir / variant["name"], variant["files"])
        print(f"{variant['name']}: workload={variant['workload_hash'][:12]}", end=" ")
        _print_summary(variant["summary"])
    print(f"wrote comparison.csv and {len(payload['variants'])} variant dirs to {outdir}")
    return EXIT_OK


def cmd_topologies(args) -> int:
    with _open_client(args.server) as client:
        payload = _check(client.get("/topologies"))
    for info in payload:
        print(f"{info['name']}: {info['nodes']} nodes, {info['links']} links, "
              f"normalized capacity {info['min_capacity']:.4g}..{info['max_capacity']:.4g}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def _add_shared_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--server", help="service URL (default: run in-process)")
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--topology", help=f"bundled name {BUNDLED_TOPOLOGIES} or a file path")
    p.add_argument("--scheme", choices=SCHEME_CHOICES)
    p.add_argument("--policy", choices=POLICY_CHOICES)
    p.add_argument("--weight", choices=WEIGHT_CHOICES)
    p.add_argument("--pf", type=float)
    p.add_argument("--nmax", help="max partitions per transfer (integer or 'all')")
    p.add_argument("--delta", type=float)
    p.add_argument("--lambda", dest="arrival_rate", type=float,
                   help="Poisson arrival rate (transfers per timeslot)")
    p.add_argument("--receivers", type=int)
    p.add_argument("--transfers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dist", choices=("exponential", "pareto", "empirical"))
    p.add_argument("--mean-volume", type=float)
    p.add_argument("--pareto-shape", type=float)
    p.add_argument("--min-volume", type=float)
    p.add_argument("--max-volume", type=float)
    p.add_argument("--cdf-file", help="two-column (volume, cum. probability) file")
    p.add_argument("--workload", help="replay transfers from a workload JSON file")
    p.add_argument("--debug-checks", action="store_true")
    p.add_argument("--out", default="out", help="output directory (default: out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bulkcast",
        description="Simulate bulk multicast transfers over capacitated WANs")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation and write metrics files")
    _add_shared_run_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="seed-paired sweep over one axis")
    _add_shared_run_flags(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=AXIS_CHOICES)
    p_sweep.add_argument("--values", required=True, nargs="+")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)

    p_topo = sub.add_parser("topologies", help="list bundled topologies")
    p_topo.add_argument("--server")
    p_topo.set_defaults(func=cmd_topologies)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
