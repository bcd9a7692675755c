"""Scaler lifecycle engine and the Monitor/Executor interfaces.

A scaler is any object with the three-method template ``register(monitor,
executor, info)`` / ``scale(monitor, executor, now_s)`` / ``cancel()``.  The
harness owns the lifecycle: exactly one register, periodic scale ticks while
injection runs, exactly one cancel.  Scalers observe the system only through
a MonitorView frozen at the tick time (scraped data only, never raw
simulation state) and act only through the ExecutorView, which logs every
action.  Exceptions inside ``scale`` are contained and recorded as failed
ticks; the experiment continues.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from . import telemetry
from .engine import Simulation
from .errors import LifecycleError
from .topology import ServiceTopology

CREATED = "created"
REGISTERED = "registered"
CANCELLED = "cancelled"

DEFAULT_CONTROL_INTERVAL_S = 15.0
DEFAULT_MONITOR_WINDOW_S = 60.0


@dataclass(frozen=True)
class ServiceInfo:
    name: str
    initial_replicas: int
    min_replicas: int
    max_replicas: int
    service_rate_mu: float


@dataclass(frozen=True)
class TopologyInfo:
    """Static facts a scaler may use: bounds, rates and the call graph."""

    benchmark: str
    entry_service: str
    sla_ms: float
    services: tuple[ServiceInfo, ...]
    edges: tuple[tuple[str, str, float], ...]
    rate_factors: dict

    @classmethod
    def from_topology(cls, topo: ServiceTopology) -> "TopologyInfo":
        return cls(
            benchmark=topo.name,
            entry_service=topo.entry_service,
            sla_ms=topo.sla_ms,
            services=tuple(ServiceInfo(s.name, s.initial_replicas, s.min_replicas,
                                       s.max_replicas, s.service_rate_mu)
                           for s in topo.services),
            edges=tuple((e.caller, e.callee, e.calls_per_request)
                        for e in topo.edges),
            rate_factors=topo.rate_factors(),
        )

    def service(self, name: str) -> ServiceInfo:
        for s in self.services:
            if s.name == name:
                return s
        raise KeyError(name)


class MonitorView:
    """Read-only metric access frozen at one control tick.

    All queries are answered from scraped samples at or before the view's
    time, so a scaler can never observe ahead of its tick.
    """

    def __init__(self, store: telemetry.MetricStore, info: TopologyInfo,
                 t_s: float = 0.0,
                 default_window_s: float = DEFAULT_MONITOR_WINDOW_S):
        self._store = store
        self.info = info
        self.t_s = t_s
        self.default_window_s = default_window_s

    def at(self, t_s: float) -> "MonitorView":
        return MonitorView(self._store, self.info, t_s, self.default_window_s)

    def rate(self, name: str, labels: dict | None = None,
             window_s: float | None = None) -> float | None:
        return telemetry.query_rate(self._store, name, labels,
                                    window_s or self.default_window_s, self.t_s)

    def latency_quantile(self, service: str, q: float,
                         window_s: float | None = None) -> float | None:
        return telemetry.query_latency_quantile(
            self._store, service, q, window_s or self.default_window_s, self.t_s)

    def ready_replicas(self, service: str) -> int:
        ser = self._store.samples("kube_pod_info", {"service": service})
        if ser is None:
            return self.info.service(service).initial_replicas
        ts, vs = ser
        from bisect import bisect_right
        i = bisect_right(ts, self.t_s) - 1
        if i < 0:
            return self.info.service(service).initial_replicas
        return int(vs[i])

    def cpu_utilization(self, service: str,
                        window_s: float | None = None) -> float | None:
        """rate(container cpu) averaged over the ready replicas."""
        r = self.rate("container_cpu_usage_seconds_total", {"service": service},
                      window_s)
        if r is None:
            return None
        ready = self.ready_replicas(service)
        if ready <= 0:
            return None
        return r / ready

    def request_rate(self, service: str,
                     window_s: float | None = None) -> float | None:
        """Sum of istio_requests_total rates across response codes."""
        total = None
        for code in ("200", "408", "503"):
            r = self.rate("istio_requests_total",
                          {"destination_service": service, "response_code": code},
                          window_s)
            if r is not None:
                total = r if total is None else total + r
        return total


class ScalingAction(NamedTuple):
    tick_s: float
    scaler_id: str
    service: str
    requested: int | None
    clamped: int | None
    status: str


class ExecutorView:
    """Replica set-point actuation; the only mutation path a scaler has."""

    def __init__(self, sim: Simulation, scaler_id: str, log: list):
        self._sim = sim
        self.scaler_id = scaler_id
        self._log = log
        self.t_s = 0.0

    def at(self, t_s: float) -> "ExecutorView":
        view = ExecutorView(self._sim, self.scaler_id, self._log)
        view.t_s = t_s
        return view

    def set_replicas(self, service: str, target: int) -> int:
        clamped = self._sim.set_replicas(service, int(target))
        self._log.append(ScalingAction(self.t_s, self.scaler_id, service,
                                       int(target), clamped, "applied"))
        return clamped


class Scaler:
    """Template base: override any of register / scale / cancel."""

    def register(self, monitor: MonitorView, executor: ExecutorView,
                 info: TopologyInfo) -> None:
        pass

    def scale(self, monitor: MonitorView, executor: ExecutorView,
              now_s: float) -> None:
        pass

    def cancel(self) -> None:
        pass


class ScalerHandle:
    """Lifecycle wrapper for one scaler instance in one run."""

    def __init__(self, scaler: Scaler, scaler_id: str,
                 control_interval_s: float = DEFAULT_CONTROL_INTERVAL_S,
                 info: TopologyInfo | None = None):
        if not control_interval_s > 0:
            raise ValueError("control_interval_s must be > 0")
        self.scaler = scaler
        self.scaler_id = scaler_id
        self.control_interval_s = float(control_interval_s)
        self.info = info
        self.lifecycle_state = CREATED
        self.actions: list[ScalingAction] = []
        self.registered_at: float | None = None
        self.cancelled_at: float | None = None
        self.tick_times: list[float] = []
        self.monitor: MonitorView | None = None
        self.executor: ExecutorView | None = None


def register_scaler(handle: ScalerHandle, monitor: MonitorView,
                    executor: ExecutorView) -> None:
    if handle.lifecycle_state != CREATED:
        raise LifecycleError(
            f"cannot register scaler in state {handle.lifecycle_state}")
    handle.monitor = monitor
    handle.executor = executor.at(monitor.t_s)
    handle.executor._log = handle.actions
    handle.scaler.register(monitor, handle.executor, handle.info)
    handle.lifecycle_state = REGISTERED
    handle.registered_at = monitor.t_s


def drive_tick(handle: ScalerHandle, t_s: float) -> list[ScalingAction]:
    """Run one control tick at t_s; scaler faults are logged, not raised."""
    if handle.lifecycle_state != REGISTERED:
        raise LifecycleError(
            f"cannot tick scaler in state {handle.lifecycle_state}")
    handle.tick_times.append(t_s)
    before = len(handle.actions)
    monitor = handle.monitor.at(t_s)
    executor = handle.executor.at(t_s)
    try:
        handle.scaler.scale(monitor, executor, t_s)
    except Exception as exc:  # contained by contract
        handle.actions.append(ScalingAction(
            t_s, handle.scaler_id, "", None, None,
            f"failed:{type(exc).__name__}"))
    return handle.actions[before:]


def cancel_scaler(handle: ScalerHandle,
                  t_s: float | None = None) -> list[ScalingAction]:
    """Invoke the scaler's cancel exactly once; returns the full action log."""
    if handle.lifecycle_state != REGISTERED:
        raise LifecycleError(
            f"cannot cancel scaler in state {handle.lifecycle_state}")
    handle.scaler.cancel()
    handle.lifecycle_state = CANCELLED
    handle.cancelled_at = t_s
    return list(handle.actions)


def write_actions_csv(actions: list[ScalingAction], out_path) -> int:
    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("tick_s,scaler_id,service,requested,clamped,status\n")
        for a in sorted(actions, key=lambda a: a.tick_s):
            req = "" if a.requested is None else a.requested
            cl = "" if a.clamped is None else a.clamped
            f.write(f"{a.tick_s!r},{a.scaler_id},{a.service},{req},{cl},{a.status}\n")
    return len(actions)
