"""Prometheus-style metric store over the simulation.

Every ``scrape_interval_s`` seconds the full schema below is sampled from the
simulation into timestamped series; queries mirror the monitoring system's
rate / histogram-quantile semantics, and the store exports to a sorted,
byte-stable CSV.

Service level: kube_pod_info (gauge), istio_requests_total (counter, by
response_code 200/408/503), istio_request_duration_milliseconds_bucket
(cumulative histogram), container_cpu_usage_seconds_total (counter),
container_memory_usage_bytes (gauge).  Node level: node_cpu_seconds_total
(counter, mode busy/idle), node_memory_MemTotal_bytes,
node_memory_MemFree_bytes, node_memory_Buffers_bytes (gauges).

Span durations enter the histogram as wait+service at internal services and
as the downstream-inclusive duration at the entry service; dropped requests
are observed in the +Inf bucket (no finite duration exists for them), which
keeps the bucket totals equal to the request counters and makes SLA
accounting from the 500 ms bound exact.
"""

from __future__ import annotations

import csv
from bisect import bisect_left, bisect_right
from pathlib import Path

from .engine import Simulation
from .engine.core import BUCKET_BOUNDS_MS
from .errors import IntegrityError, UnknownMetricError

NODE_CORES_DEFAULT = 32.0
NODE_MEMORY_BYTES_DEFAULT = 96 * 1024 ** 3  # one node: 32 cores / 96 GB

COUNTER = "counter"
GAUGE = "gauge"

METRIC_KINDS = {
    "kube_pod_info": GAUGE,
    "istio_requests_total": COUNTER,
    "istio_request_duration_milliseconds_bucket": COUNTER,
    "container_cpu_usage_seconds_total": COUNTER,
    "container_memory_usage_bytes": GAUGE,
    "node_cpu_seconds_total": COUNTER,
    "node_memory_MemFree_bytes": GAUGE,
    "node_memory_MemTotal_bytes": GAUGE,
    "node_memory_Buffers_bytes": GAUGE,
}


def _fmt_bound(b: float) -> str:
    return str(int(b)) if float(b).is_integer() else repr(float(b))


def _labels_key(labels: dict | None) -> tuple:
    if not labels:
        return ()
    return tuple(sorted((str(k), str(v)) for k, v in labels.items()))


def _labels_str(key: tuple) -> str:
    return ";".join(f"{k}={v}" for k, v in key)


class MetricStore:
    """Time-ordered series keyed by (metric name, frozen label set)."""

    def __init__(self, scrape_interval_s: float = 5.0,
                 bucket_bounds_ms=BUCKET_BOUNDS_MS,
                 node_cores: float = NODE_CORES_DEFAULT,
                 node_memory_bytes: int = NODE_MEMORY_BYTES_DEFAULT):
        if not scrape_interval_s > 0:
            raise ValueError("scrape_interval_s must be > 0")
        self.scrape_interval_s = float(scrape_interval_s)
        self.bucket_bounds_ms = tuple(bucket_bounds_ms)
        self.node_cores = float(node_cores)
        self.node_memory_bytes = int(node_memory_bytes)
        self.series: dict[tuple, tuple[list, list]] = {}
        self.scrape_times: list[float] = []

    def is_aligned(self, t_s: float) -> bool:
        k = round(t_s / self.scrape_interval_s)
        return abs(k * self.scrape_interval_s - t_s) < 1e-9

    def _append(self, name: str, labels: dict, t: float, value: float) -> None:
        key = (name, _labels_key(labels))
        ts, vs = self.series.setdefault(key, ([], []))
        if ts and t <= ts[-1]:
            raise IntegrityError(f"non-increasing scrape time for {key}")
        ts.append(t)
        vs.append(float(value))

    def samples(self, name: str, labels: dict | None = None):
        if name not in METRIC_KINDS:
            raise UnknownMetricError(f"unknown metric {name}")
        return self.series.get((name, _labels_key(labels)))


def scrape(sim: Simulation, store: MetricStore, t_s: float) -> int:
    """Sample the full schema at t_s (must be scrape-aligned); returns series count."""
    if not store.is_aligned(t_s):
        raise IntegrityError(
            f"scrape time {t_s} not aligned to interval {store.scrape_interval_s}")
    n = 0
    cpu_busy_total = 0.0
    mem_bytes_total = 0
    # node aggregates sum services in sorted-name order so that any consumer
    # of the exported CSV can reproduce the float sums bit-exactly
    for name in sorted(sim.service_names):
        counts = sim.replica_counts(name)
        store._append("kube_pod_info", {"service": name}, t_s, counts["ready"])
        n += 1
        rc = sim.response_counters(name)
        for code in ("200", "408", "503"):
            store._append("istio_requests_total",
                          {"destination_service": name, "response_code": code},
                          t_s, rc[code])
            n += 1
        cum = sim.duration_histogram(name)
        les = [_fmt_bound(b) for b in store.bucket_bounds_ms] + ["+Inf"]
        for le, c in zip(les, cum):
            store._append("istio_request_duration_milliseconds_bucket",
                          {"destination_service": name, "le": le}, t_s, c)
            n += 1
        cpu = sim.busy_core_seconds(name)
        cpu_busy_total += cpu
        store._append("container_cpu_usage_seconds_total", {"service": name},
                      t_s, cpu)
        n += 1
        mem = sim.memory_bytes(name)
        mem_bytes_total += mem
        store._append("container_memory_usage_bytes", {"service": name}, t_s, mem)
        n += 1
    store._append("node_cpu_seconds_total", {"mode": "busy"}, t_s, cpu_busy_total)
    store._append("node_cpu_seconds_total", {"mode": "idle"}, t_s,
                  store.node_cores * t_s - cpu_busy_total)
    store._append("node_memory_MemTotal_bytes", {}, t_s, store.node_memory_bytes)
    store._append("node_memory_MemFree_bytes", {}, t_s,
                  store.node_memory_bytes - mem_bytes_total)
    store._append("node_memory_Buffers_bytes", {}, t_s, 0.0)
    n += 5
    store.scrape_times.append(t_s)
    return n


def query_rate(store: MetricStore, name: str, labels: dict | None,
               window_s: float, t_s: float) -> float | None:
    """Per-second rate for counters, time-weighted mean for gauges.

    Returns None (the absent marker) when fewer than two samples fall in
    [t_s - window_s, t_s].
    """
    if window_s < 2 * store.scrape_interval_s:
        raise ValueError("window_s must be at least twice the scrape interval")
    kind = METRIC_KINDS.get(name)
    if kind is None:
        raise UnknownMetricError(f"unknown metric {name}")
    ser = store.samples(name, labels)
    if ser is None:
        return None
    ts, vs = ser
    lo = bisect_left(ts, t_s - window_s)
    hi = bisect_right(ts, t_s) - 1
    if hi - lo < 1:
        return None
    if kind == COUNTER:
        elapsed = ts[hi] - ts[lo]
        return (vs[hi] - vs[lo]) / elapsed
    acc = 0.0
    for i in range(lo, hi):
        acc += vs[i] * (ts[i + 1] - ts[i])
    acc += vs[hi] * (t_s - ts[hi])
    span = t_s - ts[lo]
    return acc / span if span > 0 else vs[hi]


def _windowed_buckets(store: MetricStore, service: str, window_s: float,
                      t_s: float) -> list[float] | None:
    """Cumulative bucket-count increases over the window, +Inf last."""
    out = []
    les = [_fmt_bound(b) for b in store.bucket_bounds_ms] + ["+Inf"]
    for le in les:
        ser = store.samples("istio_request_duration_milliseconds_bucket",
                            {"destination_service": service, "le": le})
        if ser is None:
            return None
        ts, vs = ser
        hi = bisect_right(ts, t_s) - 1
        if hi < 0:
            return None
        lo = bisect_right(ts, t_s - window_s) - 1
        base = vs[lo] if lo >= 0 else 0.0
        out.append(vs[hi] - base)
    return out


def query_latency_quantile(store: MetricStore, service: str, q: float,
                           window_s: float, t_s: float) -> float | None:
    """histogram_quantile over the windowed bucket increments.

    Linear interpolation inside the selected bucket; a quantile landing in
    the +Inf bucket reports the highest finite bound.  Returns None when the
    window holds no observations.
    """
    if not 0.0 < q < 1.0:
        raise ValueError("q must be in (0, 1)")
    cum = _windowed_buckets(store, service, window_s, t_s)
    if cum is None:
        return None
    total = cum[-1]
    if total <= 0:
        return None
    rank = q * total
    bounds = store.bucket_bounds_ms
    prev_cum = 0.0
    for i, c in enumerate(cum):
        if c >= rank:
            if i >= len(bounds):  # +Inf bucket
                return float(bounds[-1])
            lower = bounds[i - 1] if i > 0 else 0.0
            upper = bounds[i]
            count = c - prev_cum
            return lower + (upper - lower) * (rank - prev_cum) / count
        prev_cum = c
    return float(bounds[-1])


def export_csv(store: MetricStore, out_path: str | Path) -> int:
    """Write all samples sorted by (timestamp, name, labels); returns row count."""
    rows = []
    for (name, lkey), (ts, vs) in store.series.items():
        lstr = _labels_str(lkey)
        for t, v in zip(ts, vs):
            rows.append((t, name, lstr, v))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    out_path = Path(out_path)
    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("timestamp_s,name,labels,value\n")
        for t, name, lstr, v in rows:
            f.write(f"{t!r},{name},{lstr},{v!r}\n")
    return len(rows)


def store_from_csv(path: str | Path,
                   scrape_interval_s: float | None = None) -> MetricStore:
    """Rebuild a queryable store from an exported metrics.csv."""
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["timestamp_s", "name", "labels", "value"]:
            raise IntegrityError(f"{path}: unexpected metrics header {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise IntegrityError(f"{path}:{lineno}: expected 4 columns")
            rows.append((float(row[0]), row[1], row[2], float(row[3])))
    times = sorted({r[0] for r in rows})
    if scrape_interval_s is None:
        if len(times) < 2:
            raise IntegrityError("cannot infer scrape interval from one scrape")
        scrape_interval_s = times[1] - times[0]
    store = MetricStore(scrape_interval_s=scrape_interval_s)
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    for t, name, lstr, v in rows:
        labels = dict(pair.split("=", 1) for pair in lstr.split(";")) if lstr else {}
        store._append(name, labels, t, v)
    store.scrape_times = times
    return store
