"""Trace-driven load generation.

The load shape is a CSV schedule of concurrent user counts
(``offset_s,user_count`` with a header row; offsets strictly increasing from
0).  The injection horizon is the last offset, so the final row terminates
the run and its count is never applied.

Users follow a closed-loop model by default: issue a request to the entry
service, wait for its completion (or timeout/drop), then think for an
exponential time before the next request.  New users begin with a think
phase; surplus users retire immediately when thinking, or after their
in-flight request completes.  The open-loop model instead issues Poisson
arrivals at user_count * request_rate_per_user, independent of completions.

The injector and the scaler's control loop are multiplexed onto the one
simulated clock: this module advances the simulation between scrape / trace
/ tick boundaries and applies each in a fixed order (scrape, then trace
step, then control tick), which is what makes runs reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from . import telemetry
from .engine import Simulation
from .errors import LifecycleError, TraceError
from .framework import REGISTERED, ScalerHandle, cancel_scaler, drive_tick

CLOSED_LOOP = "closed_loop"
OPEN_LOOP = "open_loop"


@dataclass(frozen=True)
class LoadTrace:
    """Step schedule of concurrent users; horizon = offset of the last step."""

    steps: tuple[tuple[float, int], ...]
    duration_s: float

    def validate(self) -> None:
        if not self.steps:
            raise TraceError("trace has no steps")
        if self.steps[0][0] != 0:
            raise TraceError("first trace offset must be 0")
        prev = None
        for off, count in self.steps:
            if prev is not None and off <= prev:
                raise TraceError(f"trace offsets must be strictly increasing at {off}")
            if count < 0:
                raise TraceError(f"negative user count at offset {off}")
            prev = off
        if self.duration_s < self.steps[-1][0]:
            raise TraceError("duration_s shorter than the last step offset")

    def max_users(self) -> int:
        return max(c for _, c in self.steps)


@dataclass(frozen=True)
class UserModel:
    mode: str = CLOSED_LOOP
    think_time_s: float = 1.0
    request_rate_per_user: float = 1.0

    def validate(self) -> None:
        if self.mode not in (CLOSED_LOOP, OPEN_LOOP):
            raise TraceError(f"unknown user model mode {self.mode!r}")
        if self.mode == CLOSED_LOOP and not self.think_time_s > 0:
            raise TraceError("think_time_s must be > 0 in closed_loop mode")
        if self.mode == OPEN_LOOP and not self.request_rate_per_user > 0:
            raise TraceError("request_rate_per_user must be > 0 in open_loop mode")


def load_trace(csv_path: str | Path) -> LoadTrace:
    """Parse and validate a trace CSV; errors carry the offending row number."""
    path = Path(csv_path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise TraceError(f"cannot read trace file {path}: {exc}") from exc
    if not lines or lines[0].strip() != "offset_s,user_count":
        raise TraceError(f"{path}: row 1: expected header 'offset_s,user_count'")
    steps = []
    for rownum, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise TraceError(f"{path}: row {rownum}: expected two columns")
        try:
            off = float(parts[0])
            count = int(parts[1])
        except ValueError:
            raise TraceError(f"{path}: row {rownum}: malformed number") from None
        if count < 0:
            raise TraceError(f"{path}: row {rownum}: negative user count")
        if steps and off <= steps[-1][0]:
            raise TraceError(f"{path}: row {rownum}: offsets must be strictly increasing")
        steps.append((off, count))
    if not steps:
        raise TraceError(f"{path}: no data rows")
    if steps[0][0] != 0:
        raise TraceError(f"{path}: row 2: first offset must be 0")
    trace = LoadTrace(steps=tuple(steps), duration_s=steps[-1][0])
    trace.validate()
    return trace


def _boundaries(trace: LoadTrace, scrape_interval_s: float,
                control_interval_s: float) -> list[float]:
    times = set()
    t = scrape_interval_s
    while t <= trace.duration_s + 1e-9:
        times.add(round(t, 9))
        t += scrape_interval_s
    t = control_interval_s
    while t < trace.duration_s - 1e-9:
        times.add(round(t, 9))
        t += control_interval_s
    for off, _ in trace.steps:
        if 0 < off < trace.duration_s:
            times.add(round(off, 9))
    times.add(round(trace.duration_s, 9))
    return sorted(times)


def run_injection(sim: Simulation, trace: LoadTrace, model: UserModel,
                  store: telemetry.MetricStore, handle: ScalerHandle) -> dict:
    """Drive injection over the trace, interleaving scaler ticks; cancel at end.

    Returns the totals at the injection horizon:
    {requests, successes, timeouts, drops, in_flight, horizon_s}.
    """
    trace.validate()
    model.validate()
    if handle.lifecycle_state != REGISTERED:
        raise LifecycleError("scaler must be registered before injection")
    if sim.clock_s != 0.0:
        raise LifecycleError("injection requires a freshly reset simulation")

    if model.mode == CLOSED_LOOP:
        sim.configure_closed_loop(model.think_time_s)
    else:
        sim.configure_open_loop(model.request_rate_per_user)

    step_at = dict(trace.steps)
    duration = trace.duration_s

    # the t=0 step applies immediately (after the caller's initial scrape)
    if 0.0 in step_at:
        sim.set_user_target(step_at[0.0])

    for t in _boundaries(trace, store.scrape_interval_s, handle.control_interval_s):
        sim.advance(t)
        if store.is_aligned(t):
            telemetry.scrape(sim, store, t)
        if t in step_at and t < duration:
            sim.set_user_target(step_at[t])
        if t < duration and _is_multiple(t, handle.control_interval_s):
            drive_tick(handle, t)

    sim.set_user_target(0)  # retire the population; in-flight requests drain
    cancel_scaler(handle, duration)
    totals = sim.request_totals()
    return {
        "requests": totals["injected"],
        "successes": totals["success"],
        "timeouts": totals["timeout"],
        "drops": totals["dropped"],
        "in_flight": totals["in_flight"],
        "horizon_s": duration,
    }


def _is_multiple(t: float, interval: float) -> bool:
    k = round(t / interval)
    return abs(k * interval - t) < 1e-9
