"""Facade over the event-loop kernel: build, drive and inspect a simulation."""

from __future__ import annotations

from typing import NamedTuple

from ..errors import UnknownServiceError
from ..topology import ServiceTopology
from . import kernel as _k

OUTCOME_NAMES = {
    _k.OUT_SUCCESS: "success",
    _k.OUT_TIMEOUT: "timeout",
    _k.OUT_DROPPED: "dropped",
}

DEFAULT_STARTUP_DELAY_S = 10.0

# Istio's default request-duration bucket ladder, milliseconds.  500 ms (the
# default SLA) is an exact bound, which keeps SLA accounting from the
# histogram exact.
BUCKET_BOUNDS_MS = (0.5, 1.0, 5.0, 10.0, 25.0, 50.0, 100.0, 250.0, 500.0,
                    1000.0, 2500.0, 5000.0, 10000.0, 30000.0, 60000.0,
                    300000.0)


class RequestRecord(NamedTuple):
    """One injected request's end-to-end outcome."""

    id: int
    arrival_time_s: float
    completion_time_s: float | None
    latency_ms: float | None
    outcome: str


class Simulation:
    """One deterministic run: a seeded kernel engine bound to a topology.

    Never share an instance between concurrent drivers; run one simulation
    per experiment and create a fresh one (same topology, same seed) to
    reproduce a run.
    """

    def __init__(self, topology: ServiceTopology, seed: int,
                 startup_delay_s: float = DEFAULT_STARTUP_DELAY_S):
        topology.validate()
        self.topology = topology
        self.seed = int(seed)
        self.startup_delay_s = float(startup_delay_s)
        names = [s.name for s in topology.services]
        self._idx = {n: i for i, n in enumerate(names)}
        self.service_names = tuple(names)

        svc_params = []
        for s in topology.services:
            svc_params.append((
                float(s.service_rate_mu),
                1 if topology.deterministic_service_times else 0,
                float(s.cpu_factor()),
                int(s.initial_replicas),
                int(s.min_replicas),
                int(s.max_replicas),
                int(s.queue_capacity),
                float(s.base_memory_mb),
                float(s.memory_per_utilization_mb),
            ))
        svc_edges = [[] for _ in names]
        for e in topology.edges:
            whole = int(e.calls_per_request)
            frac = e.calls_per_request - whole
            svc_edges[self._idx[e.caller]].append((self._idx[e.callee], whole, frac))

        self._eng = _k.Engine(
            svc_params, svc_edges, self._idx[topology.entry_service],
            topology.timeout_ms / 1000.0, self.startup_delay_s,
            list(BUCKET_BOUNDS_MS), self.seed)

    # ------------------------------------------------------------- plumbing

    def index_of(self, service: str) -> int:
        try:
            return self._idx[service]
        except KeyError:
            raise UnknownServiceError(f"unknown service {service}") from None

    @property
    def clock_s(self) -> float:
        return self._eng.clock_s()

    @property
    def entry_service(self) -> str:
        return self.topology.entry_service

    # ------------------------------------------------------------ lifecycle

    def inject_request(self, arrival_time_s: float) -> int:
        if arrival_time_s < self.clock_s:
            raise ValueError(
                f"arrival_time_s {arrival_time_s} is before the clock {self.clock_s}")
        return self._eng.schedule_inject(float(arrival_time_s))

    def set_replicas(self, service: str, target: int,
                     at_time_s: float | None = None) -> int:
        i = self.index_of(service)
        if at_time_s is None or at_time_s <= self.clock_s:
            return self._eng.scale_now(i, int(target))
        return self._eng.schedule_scale(i, int(target), float(at_time_s))

    def advance_to(self, t_s: float) -> list[RequestRecord]:
        if t_s < self.clock_s:
            raise ValueError(f"cannot advance backwards to {t_s}")
        return [self._record(rid) for rid in self._eng.advance(float(t_s))]

    def advance(self, t_s: float) -> None:
        """advance_to without materializing the completed records."""
        if t_s < self.clock_s:
            raise ValueError(f"cannot advance backwards to {t_s}")
        self._eng.advance(float(t_s))

    # ----------------------------------------------------------- user model

    def configure_closed_loop(self, think_time_s: float) -> None:
        if not think_time_s > 0:
            raise ValueError("think_time_s must be > 0 in closed-loop mode")
        self._eng.set_closed_model(float(think_time_s))

    def configure_open_loop(self, request_rate_per_user: float) -> None:
        if not request_rate_per_user > 0:
            raise ValueError("request_rate_per_user must be > 0 in open-loop mode")
        self._eng.set_open_model(float(request_rate_per_user))

    def set_user_target(self, count: int) -> None:
        if count < 0:
            raise ValueError("user count must be >= 0")
        self._eng.set_user_target(int(count))

    def active_users(self) -> int:
        return self._eng.active_users()

    # ------------------------------------------------------------ telemetry

    def replica_counts(self, service: str) -> dict:
        ready, busy, queued, pending, retiring = self._eng.counts(self.index_of(service))
        return {"ready": ready, "busy": busy, "queued": queued,
                "pending": pending, "retiring": retiring}

    def response_counters(self, service: str) -> dict:
        c200, c408, c503 = self._eng.counters(self.index_of(service))
        return {"200": c200, "408": c408, "503": c503}

    def duration_histogram(self, service: str) -> list[int]:
        """Cumulative per-bucket counts, +Inf last (len(bounds) + 1 entries)."""
        return self._eng.hist_cumulative(self.index_of(service))

    def busy_core_seconds(self, service: str) -> float:
        return self._eng.busy_core_seconds(self.index_of(service))

    def memory_bytes(self, service: str) -> int:
        return self._eng.memory_bytes(self.index_of(service))

    def area_in_system(self, service: str) -> float:
        """Integral of (in service + waiting) over time, for Little's law."""
        return self._eng.area_in_system(self.index_of(service))

    def span_stats(self, service: str) -> dict:
        started, completed, wait_sum, serv_sum = self._eng.span_stats(
            self.index_of(service))
        return {"started": started, "completed": completed,
                "wait_sum_s": wait_sum, "service_sum_s": serv_sum}

    def request_totals(self) -> dict:
        injected, success, timeout, dropped, inflight = self._eng.totals()
        return {"injected": injected, "success": success, "timeout": timeout,
                "dropped": dropped, "in_flight": inflight}

    # -------------------------------------------------------------- records

    def _record(self, rid: int) -> RequestRecord:
        arrival, completion, lat_ms, outcome = self._eng.record_of(rid)
        return RequestRecord(
            id=rid,
            arrival_time_s=arrival,
            completion_time_s=None if completion < 0 else completion,
            latency_ms=None if lat_ms < 0 else lat_ms,
            outcome=OUTCOME_NAMES.get(outcome, "pending"),
        )

    def finished_records(self) -> list[RequestRecord]:
        """All requests with a resolved outcome, ordered by id."""
        out = []
        for rid in range(self._eng.n_requests()):
            rec = self._record(rid)
            if rec.outcome != "pending":
                out.append(rec)
        return out


def build_simulation(topology: ServiceTopology, seed: int,
                     startup_delay_s: float = DEFAULT_STARTUP_DELAY_S) -> Simulation:
    """Fresh, fully reset state: clock 0, initial replicas, empty queues."""
    return Simulation(topology, seed, startup_delay_s)


def inject_request(sim: Simulation, arrival_time_s: float) -> int:
    return sim.inject_request(arrival_time_s)


def set_replicas(sim: Simulation, service: str, target: int,
                 at_time_s: float | None = None) -> int:
    return sim.set_replicas(service, target, at_time_s)


def advance_to(sim: Simulation, t_s: float) -> list[RequestRecord]:
    return sim.advance_to(t_s)


def snapshot_resources(sim: Simulation, node_cores: float = 32.0,
                       node_memory_bytes: int = 96 * 1024 ** 3) -> dict:
    """Instantaneous per-service resource usage plus the node aggregate."""
    services = {}
    cpu_total = 0.0
    mem_total_bytes = 0
    for name in sim.service_names:
        counts = sim.replica_counts(name)
        i = sim.index_of(name)
        cpu = sim._eng.cpu_rate_cores(i)
        mem_b = sim.memory_bytes(name)
        services[name] = {
            "ready_replicas": counts["ready"],
            "cpu_rate_cores": cpu,
            "memory_mb": mem_b / 1048576.0,
        }
        cpu_total += cpu
        mem_total_bytes += mem_b
    return {
        "services": services,
        "node": {
            "cpu_rate_cores": cpu_total,
            "cpu_capacity_cores": node_cores,
            "memory_mb": mem_total_bytes / 1048576.0,
            "memory_capacity_mb": node_memory_bytes / 1048576.0,
        },
    }
