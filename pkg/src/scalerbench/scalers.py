"""Reference scaler policies: none, threshold (khpa), pid, predictive.

Each policy is implemented as a small pure decision function plus a Scaler
subclass that wires it to the Monitor/Executor interfaces.  Ids accepted by
the experiment config: ``none``, ``khpa``, ``pid``, ``predictive``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .framework import ExecutorView, MonitorView, Scaler, TopologyInfo
from .errors import ValidationError


# --------------------------------------------------------------------- khpa

@dataclass(frozen=True)
class KhpaConfig:
    """Threshold policy around a target CPU utilization fraction.

    Matches the stock horizontal pod autoscaler: no action inside the
    tolerance band, otherwise desired = ceil(current * utilization/threshold);
    scale-down applies the max over a stabilization window of proposals.
    """

    cpu_threshold: float
    tolerance: float = 0.1
    stabilization_window_s: float = 300.0

    def validate(self) -> None:
        if not 0.0 < self.cpu_threshold <= 1.0:
            raise ValidationError("cpu_threshold must be in (0, 1]")
        if self.tolerance < 0:
            raise ValidationError("tolerance must be >= 0")


def khpa_desired(current: int, utilization: float, cfg: KhpaConfig) -> int:
    """Raw desired replica count for one service, before stabilization."""
    if current < 1:
        raise ValueError("current must be >= 1")
    if utilization < 0:
        raise ValueError("utilization must be >= 0")
    ratio = utilization / cfg.cpu_threshold
    if abs(ratio - 1.0) <= cfg.tolerance:
        return current
    return math.ceil(current * ratio)


class KhpaScaler(Scaler):
    def __init__(self, cfg: KhpaConfig):
        cfg.validate()
        self.cfg = cfg
        self._proposals: dict[str, list[tuple[float, int]]] = {}

    def register(self, monitor, executor, info: TopologyInfo) -> None:
        self.info = info
        self._proposals = {s.name: [] for s in info.services}

    def scale(self, monitor: MonitorView, executor: ExecutorView,
              now_s: float) -> None:
        for svc in self.info.services:
            util = monitor.cpu_utilization(svc.name)
            if util is None:
                continue
            current = monitor.ready_replicas(svc.name)
            if current < 1:
                current = 1
            raw = khpa_desired(current, util, self.cfg)
            recs = self._proposals[svc.name]
            recs.append((now_s, raw))
            cutoff = now_s - self.cfg.stabilization_window_s
            while recs and recs[0][0] < cutoff:
                recs.pop(0)
            effective = max(r for _, r in recs)
            if effective != current:
                executor.set_replicas(svc.name, effective)


# ---------------------------------------------------------------------- pid

@dataclass(frozen=True)
class PidConfig:
    """Latency-feedback controller on a tail quantile of the entry service."""

    target_latency_ms: float = 400.0
    quantile: float = 0.95
    k_p: float = 1.0
    k_i: float = 0.1
    k_d: float = 0.0
    integral_bound: float = 20.0

    def validate(self) -> None:
        if not self.target_latency_ms > 0:
            raise ValidationError("target_latency_ms must be > 0")
        if not 0.0 < self.quantile < 1.0:
            raise ValidationError("quantile must be in (0, 1)")


def pid_step(errors: list[float], cfg: PidConfig, current: int,
             min_replicas: int = 1) -> int:
    """One controller step from the normalized error history.

    errors[-1] is the current error (observed - target)/target.  The
    integral folds the history with anti-windup clamping at each step; the
    derivative uses the previous error (0 when absent).  Returns
    current + round(delta), floored at min_replicas; rounding is
    half-away-from-zero so symmetric errors act symmetrically.
    """
    if not errors:
        return current
    e = errors[-1]
    e_prev = errors[-2] if len(errors) > 1 else 0.0
    integral = 0.0
    for x in errors:
        integral += x
        integral = max(-cfg.integral_bound, min(cfg.integral_bound, integral))
    delta = cfg.k_p * e + cfg.k_i * integral + cfg.k_d * (e - e_prev)
    step = int(math.floor(abs(delta) + 0.5))
    if delta < 0:
        step = -step
    return max(min_replicas, current + step)


class PidScaler(Scaler):
    def __init__(self, cfg: PidConfig):
        cfg.validate()
        self.cfg = cfg
        self.errors: list[float] = []

    def register(self, monitor, executor, info: TopologyInfo) -> None:
        self.info = info
        self.errors = []

    def scale(self, monitor: MonitorView, executor: ExecutorView,
              now_s: float) -> None:
        observed = monitor.latency_quantile(self.info.entry_service,
                                            self.cfg.quantile)
        if observed is None:
            return  # no traffic in the window: propose nothing
        self.errors.append((observed - self.cfg.target_latency_ms)
                           / self.cfg.target_latency_ms)
        for svc in self.info.services:
            current = monitor.ready_replicas(svc.name)
            desired = pid_step(self.errors, self.cfg, current, svc.min_replicas)
            if desired != current:
                executor.set_replicas(svc.name, desired)


# --------------------------------------------------------------- predictive

@dataclass(frozen=True)
class PredictiveConfig:
    """Forecast-capacity policy for one service.

    Extrapolates the arrival rate linearly over the history window, then
    sizes the pool so the forecast runs each replica at rho_target of its
    estimated per-replica capacity mu_hat.
    """

    mu_hat: float
    history_window_s: float = 120.0
    horizon_s: float = 30.0
    rho_target: float = 0.7
    min_replicas: int = 1
    max_replicas: int = 20

    def validate(self, control_interval_s: float | None = None) -> None:
        if not self.mu_hat > 0:
            raise ValidationError("mu_hat must be > 0")
        if not 0.0 < self.rho_target < 1.0:
            raise ValidationError("rho_target must be in (0, 1)")
        if control_interval_s is not None and self.horizon_s < control_interval_s:
            raise ValidationError("horizon_s must cover the control interval")


def forecast_rate(history: list[tuple[float, float]], horizon_s: float) -> float:
    """Least-squares linear extrapolation of (t, rate) points, floored at 0."""
    n = len(history)
    if n < 2:
        raise ValueError("need at least two history points for a slope")
    mean_t = sum(t for t, _ in history) / n
    mean_r = sum(r for _, r in history) / n
    sxx = sum((t - mean_t) ** 2 for t, _ in history)
    sxy = sum((t - mean_t) * (r - mean_r) for t, r in history)
    slope = sxy / sxx if sxx > 0 else 0.0
    t_target = history[-1][0] + horizon_s
    return max(0.0, mean_r + slope * (t_target - mean_t))


def predictive_desired(history: list[tuple[float, float]],
                       cfg: PredictiveConfig) -> int:
    """Replicas so the forecast rate runs the pool at rho_target utilization."""
    lam = forecast_rate(history, cfg.horizon_s)
    desired = math.ceil(lam / (cfg.mu_hat * cfg.rho_target))
    return max(cfg.min_replicas, min(cfg.max_replicas, desired))


class PredictiveScaler(Scaler):
    def __init__(self, history_window_s: float = 120.0, horizon_s: float = 30.0,
                 rho_target: float = 0.7):
        self.history_window_s = float(history_window_s)
        self.horizon_s = float(horizon_s)
        self.rho_target = float(rho_target)
        self.history: list[tuple[float, float]] = []

    def register(self, monitor, executor, info: TopologyInfo) -> None:
        self.info = info
        self.history = []
        # white-box capacity estimates straight from the declared topology
        self._cfgs = {
            s.name: PredictiveConfig(
                mu_hat=s.service_rate_mu,
                history_window_s=self.history_window_s,
                horizon_s=self.horizon_s,
                rho_target=self.rho_target,
                min_replicas=s.min_replicas,
                max_replicas=s.max_replicas,
            )
            for s in info.services
        }

    def scale(self, monitor: MonitorView, executor: ExecutorView,
              now_s: float) -> None:
        rate = monitor.request_rate(self.info.entry_service)
        if rate is None:
            return
        self.history.append((now_s, rate))
        cutoff = now_s - self.history_window_s
        while self.history and self.history[0][0] < cutoff:
            self.history.pop(0)
        if len(self.history) < 2:
            return
        factors = self.info.rate_factors
        for svc in self.info.services:
            factor = factors.get(svc.name, 0.0)
            scaled = [(t, r * factor) for t, r in self.history]
            desired = predictive_desired(scaled, self._cfgs[svc.name])
            current = monitor.ready_replicas(svc.name)
            if desired != current:
                executor.set_replicas(svc.name, desired)


# ------------------------------------------------------------------ factory

class NoneScaler(Scaler):
    """Baseline that never issues a scaling action."""


SCALER_IDS = ("none", "khpa", "pid", "predictive")


def make_scaler(scaler_id: str, params: dict | None = None) -> Scaler:
    params = dict(params or {})
    if scaler_id == "none":
        if params:
            raise ValidationError("none scaler takes no parameters")
        return NoneScaler()
    if scaler_id == "khpa":
        if "cpu_threshold" not in params:
            raise ValidationError("khpa requires cpu_threshold")
        return KhpaScaler(KhpaConfig(**params))
    if scaler_id == "pid":
        return PidScaler(PidConfig(**params))
    if scaler_id == "predictive":
        return PredictiveScaler(**params)
    raise ValidationError(
        f"unknown scaler id {scaler_id!r}; known ids: {', '.join(SCALER_IDS)}")


def default_label(scaler_id: str, params: dict | None = None) -> str:
    if scaler_id == "khpa" and params and "cpu_threshold" in params:
        return f"khpa-{params['cpu_threshold']}"
    return scaler_id
