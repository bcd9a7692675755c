"""Benchmark loading and reset.

A benchmark manifest is a JSON object with keys ``topology_path`` (relative
paths resolve against the manifest's directory), a descriptive ``traffic``
routing block, and optional per-service parameter ``overrides``.  The
traffic block is recorded in run metadata but does not alter simulation
behavior: the simulated system has exactly one entry service.

Reset builds a from-scratch simulation state — nothing survives between
experiments except what the explicit (topology, seed) pair determines — so
two consecutive evaluations of different scalers observe identical initial
conditions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .engine import Simulation, build_simulation
from .engine.core import DEFAULT_STARTUP_DELAY_S
from .errors import ManifestError, TopologyError
from .topology import ServiceSpec, ServiceTopology, load_topology

_MANIFEST_KEYS = {"topology_path", "traffic", "overrides"}
_TRAFFIC_KEYS = {"entry_route", "gateway_label"}
_OVERRIDABLE = {"initial_replicas", "min_replicas", "max_replicas",
                "queue_capacity", "service_rate_mu", "cpu_demand",
                "base_memory_mb", "memory_per_utilization_mb"}


@dataclass(frozen=True)
class LoadedBenchmark:
    """A validated topology plus the manifest's routing metadata."""

    topology: ServiceTopology
    traffic: dict
    manifest_path: str
    overrides: dict


def load_benchmark(manifest_path: str | Path) -> LoadedBenchmark:
    path = Path(manifest_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(
            f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: "
            f"{exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ManifestError(f"{path}: manifest must be a JSON object")
    unknown = set(doc) - _MANIFEST_KEYS
    if unknown:
        raise ManifestError(f"{path}: unknown manifest keys {sorted(unknown)}")
    if "topology_path" not in doc:
        raise ManifestError(f"{path}: missing topology_path")

    traffic = doc.get("traffic", {})
    if not isinstance(traffic, dict):
        raise ManifestError(f"{path}: traffic must be an object")
    bad = set(traffic) - _TRAFFIC_KEYS
    if bad:
        raise ManifestError(f"{path}: unknown traffic keys {sorted(bad)}")
    traffic = {"entry_route": str(traffic.get("entry_route", "/")),
               "gateway_label": str(traffic.get("gateway_label", "ingress"))}

    topo_path = Path(doc["topology_path"])
    if not topo_path.is_absolute():
        topo_path = path.parent / topo_path
    topology = load_topology(topo_path)

    overrides = doc.get("overrides", {})
    if not isinstance(overrides, dict):
        raise ManifestError(f"{path}: overrides must be an object")
    if overrides:
        topology = apply_overrides(topology, overrides, source=str(path))
    return LoadedBenchmark(topology=topology, traffic=traffic,
                           manifest_path=str(path), overrides=overrides)


def apply_overrides(topology: ServiceTopology, overrides: dict,
                    source: str = "<overrides>") -> ServiceTopology:
    declared = {s.name for s in topology.services}
    for svc_name, fields_ in overrides.items():
        if svc_name not in declared:
            raise ManifestError(f"{source}: unknown override target {svc_name}")
        if not isinstance(fields_, dict):
            raise ManifestError(f"{source}: override for {svc_name} must be an object")
        bad = set(fields_) - _OVERRIDABLE
        if bad:
            raise ManifestError(
                f"{source}: override for {svc_name} has unknown fields {sorted(bad)}")
    services = []
    for s in topology.services:
        if s.name in overrides:
            services.append(replace_spec(s, overrides[s.name]))
        else:
            services.append(s)
    new = ServiceTopology(
        name=topology.name, services=tuple(services), edges=topology.edges,
        entry_service=topology.entry_service, sla_ms=topology.sla_ms,
        timeout_ms=topology.timeout_ms,
        deterministic_service_times=topology.deterministic_service_times)
    new.validate()
    return new


def replace_spec(spec: ServiceSpec, fields_: dict) -> ServiceSpec:
    try:
        return replace(spec, **fields_)
    except TypeError as exc:
        raise ManifestError(f"bad override for {spec.name}: {exc}") from exc


def reset_benchmark(topology: ServiceTopology, seed: int,
                    startup_delay_s: float = DEFAULT_STARTUP_DELAY_S) -> Simulation:
    """From-scratch state for one evaluation; idempotent for a given seed."""
    try:
        return build_simulation(topology, seed, startup_delay_s)
    except TopologyError:
        raise
