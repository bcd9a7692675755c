"""Service topology model: the benchmark under test.

A topology is a directed acyclic call graph of services.  Each service is a
multi-server FCFS queue (one server per replica); each edge declares how many
downstream calls a request handled at the caller issues to the callee.
Topologies are loaded from JSON documents with the top-level keys
``name, services[], edges[], entry_service, sla_ms, timeout_ms`` (plus the
optional ``deterministic_service_times`` flag); unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import TopologyError

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")


@dataclass(frozen=True)
class ServiceSpec:
    """Static parameters of one service (one replica = one server).

    ``cpu_demand`` is the core-seconds consumed per request; it defaults to
    ``1/service_rate_mu``, i.e. one full core while serving.
    """

    name: str
    service_rate_mu: float
    initial_replicas: int = 1
    cpu_demand: float | None = None
    base_memory_mb: float = 128.0
    memory_per_utilization_mb: float = 64.0
    queue_capacity: int = 250
    min_replicas: int = 1
    max_replicas: int = 20

    def cpu_factor(self) -> float:
        """Cores consumed by one busy replica (1.0 at the default demand)."""
        if self.cpu_demand is None:
            return 1.0
        return self.cpu_demand * self.service_rate_mu

    def validate(self) -> None:
        n = self.name
        if not _NAME_RE.match(n or ""):
            raise TopologyError(f"invalid service name {n!r}")
        if not self.service_rate_mu > 0:
            raise TopologyError(f"service {n}: service_rate_mu must be > 0")
        if self.min_replicas < 1:
            raise TopologyError(f"service {n}: min_replicas must be >= 1")
        if self.max_replicas < self.min_replicas:
            raise TopologyError(f"service {n}: max_replicas < min_replicas")
        if not (self.min_replicas <= self.initial_replicas <= self.max_replicas):
            raise TopologyError(
                f"service {n}: initial_replicas {self.initial_replicas} outside "
                f"[{self.min_replicas}, {self.max_replicas}]")
        if self.queue_capacity < 0:
            raise TopologyError(f"service {n}: queue_capacity must be >= 0")
        if self.base_memory_mb < 0 or self.memory_per_utilization_mb < 0:
            raise TopologyError(f"service {n}: memory fields must be >= 0")
        if self.cpu_demand is not None and self.cpu_demand < 0:
            raise TopologyError(f"service {n}: cpu_demand must be >= 0")


@dataclass(frozen=True)
class CallEdge:
    """caller -> callee with the expected number of calls per handled request.

    Values below 1 act as Bernoulli probabilities, integral values as
    deterministic counts; a value like 2.5 means 2 calls plus one more with
    probability 0.5.
    """

    caller: str
    callee: str
    calls_per_request: float

    def validate(self) -> None:
        if self.caller == self.callee:
            raise TopologyError(f"edge {self.caller}->{self.callee}: caller equals callee")
        if self.calls_per_request < 0 or not math.isfinite(self.calls_per_request):
            raise TopologyError(
                f"edge {self.caller}->{self.callee}: calls_per_request must be finite and >= 0")


@dataclass(frozen=True)
class ServiceTopology:
    """A named benchmark: services, call edges, entry point and SLA bounds."""

    name: str
    services: tuple[ServiceSpec, ...]
    edges: tuple[CallEdge, ...]
    entry_service: str
    sla_ms: float = 500.0
    timeout_ms: float = 10000.0
    deterministic_service_times: bool = False
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "services", tuple(self.services))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "_index", {s.name: s for s in self.services})

    def service(self, name: str) -> ServiceSpec:
        try:
            return self._index[name]
        except KeyError:
            raise TopologyError(f"unknown service {name}") from None

    def service_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.services)

    def edges_from(self, caller: str) -> tuple[CallEdge, ...]:
        return tuple(e for e in self.edges if e.caller == caller)

    def validate(self) -> None:
        if not self.services:
            raise TopologyError("topology declares no services")
        seen = set()
        for s in self.services:
            s.validate()
            if s.name in seen:
                raise TopologyError(f"duplicate service {s.name}")
            seen.add(s.name)
        if self.entry_service not in seen:
            raise TopologyError(f"unknown entry service {self.entry_service}")
        for e in self.edges:
            e.validate()
            if e.caller not in seen:
                raise TopologyError(f"unknown caller {e.caller}")
            if e.callee not in seen:
                raise TopologyError(f"unknown callee {e.callee}")
            if e.callee == self.entry_service:
                raise TopologyError(
                    f"entry service {self.entry_service} may not be a callee "
                    f"(edge {e.caller}->{e.callee})")
        self.topological_order()  # raises on cycles
        if not self.sla_ms > 0:
            raise TopologyError("sla_ms must be > 0")
        if not self.timeout_ms > self.sla_ms:
            raise TopologyError("timeout_ms must exceed sla_ms")

    def topological_order(self) -> list[str]:
        """Kahn's algorithm over the call graph; raises naming a cycle member."""
        names = [s.name for s in self.services]
        indeg = {n: 0 for n in names}
        out: dict[str, list[str]] = {n: [] for n in names}
        for e in self.edges:
            out[e.caller].append(e.callee)
            indeg[e.callee] += 1
        ready = [n for n in names if indeg[n] == 0]
        order: list[str] = []
        while ready:
            n = ready.pop(0)
            order.append(n)
            for m in out[n]:
                indeg[m] -= 1
                if indeg[m] == 0:
                    ready.append(m)
        if len(order) != len(names):
            stuck = sorted(n for n in names if indeg[n] > 0)
            raise TopologyError(f"call graph contains a cycle through {stuck[0]}")
        return order

    def rate_factors(self) -> dict[str, float]:
        """Expected calls per entry request reaching each service.

        Computed by propagating edge multiplicities in topological order;
        fractional multiplicities contribute their expectation.
        """
        factors = {s.name: 0.0 for s in self.services}
        factors[self.entry_service] = 1.0
        by_caller: dict[str, list[CallEdge]] = {}
        for e in self.edges:
            by_caller.setdefault(e.caller, []).append(e)
        for n in self.topological_order():
            f = factors[n]
            if f == 0.0:
                continue
            for e in by_caller.get(n, ()):
                factors[e.callee] += f * e.calls_per_request
        return factors


_SERVICE_KEYS = {f.name for f in fields(ServiceSpec)}
_EDGE_KEYS = {"caller", "callee", "calls_per_request"}
_TOP_KEYS = {"name", "services", "edges", "entry_service", "sla_ms", "timeout_ms",
             "deterministic_service_times"}


def parse_topology(doc: dict, source: str = "<topology>") -> ServiceTopology:
    """Build and validate a topology from an already-parsed JSON document."""
    if not isinstance(doc, dict):
        raise TopologyError(f"{source}: topology document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise TopologyError(f"{source}: unknown topology keys {sorted(unknown)}")
    for key in ("name", "services", "edges", "entry_service"):
        if key not in doc:
            raise TopologyError(f"{source}: missing required key '{key}'")
    services = []
    for i, s in enumerate(doc["services"]):
        if not isinstance(s, dict):
            raise TopologyError(f"{source}: services[{i}] must be an object")
        bad = set(s) - _SERVICE_KEYS
        if bad:
            raise TopologyError(f"{source}: services[{i}] unknown keys {sorted(bad)}")
        if "name" not in s or "service_rate_mu" not in s:
            raise TopologyError(f"{source}: services[{i}] needs name and service_rate_mu")
        services.append(ServiceSpec(**s))
    edges = []
    for i, e in enumerate(doc["edges"]):
        if not isinstance(e, dict) or set(e) != _EDGE_KEYS:
            raise TopologyError(
                f"{source}: edges[{i}] must have exactly keys {sorted(_EDGE_KEYS)}")
        edges.append(CallEdge(**e))
    topo = ServiceTopology(
        name=doc["name"],
        services=tuple(services),
        edges=tuple(edges),
        entry_service=doc["entry_service"],
        sla_ms=float(doc.get("sla_ms", 500.0)),
        timeout_ms=float(doc.get("timeout_ms", 10000.0)),
        deterministic_service_times=bool(doc.get("deterministic_service_times", False)),
    )
    topo.validate()
    return topo


def load_topology(path: str | Path) -> ServiceTopology:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise TopologyError(f"cannot read topology file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologyError(
            f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_topology(doc, source=str(path))
