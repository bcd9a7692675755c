"""Indicators and reports: SVR, SR, resource totals, comparison tables.

Everything here is a pure function of run artifacts (requests.csv,
metrics.csv, actions.csv, trace.csv, run-meta.json): identical files produce
byte-identical report.json and plot data.

Indicator definitions: a request violates the SLA if it timed out, was
dropped, or completed slower than sla_ms; SR is the fraction that completed
successfully.  CPU cost is the total busy core-seconds (final minus initial
counter value); memory cost integrates the sampled gauge over time, in
MB-seconds, since a gauge summed "per second" needs a time base.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from . import telemetry
from .engine import RequestRecord
from .errors import IntegrityError, UndefinedResultError

LATENCY_QUANTILES = (("p50", 0.50), ("p90", 0.90), ("p95", 0.95), ("p99", 0.99))


# ------------------------------------------------------------ request logs

def write_requests_csv(records, out_path) -> int:
    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("id,arrival_time_s,completion_time_s,latency_ms,outcome\n")
        n = 0
        for r in records:
            comp = "" if r.completion_time_s is None else repr(r.completion_time_s)
            lat = "" if r.latency_ms is None else repr(r.latency_ms)
            f.write(f"{r.id},{r.arrival_time_s!r},{comp},{lat},{r.outcome}\n")
            n += 1
    return n


def read_requests_csv(path) -> list[RequestRecord]:
    out = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["id", "arrival_time_s", "completion_time_s", "latency_ms",
                      "outcome"]:
            raise IntegrityError(f"{path}: unexpected requests header {header}")
        for row in reader:
            out.append(RequestRecord(
                id=int(row[0]),
                arrival_time_s=float(row[1]),
                completion_time_s=float(row[2]) if row[2] else None,
                latency_ms=float(row[3]) if row[3] else None,
                outcome=row[4],
            ))
    return out


# -------------------------------------------------------------- indicators

def compute_svr(requests, sla_ms: float) -> float:
    """Fraction of requests violating the SLA (failures count as violations)."""
    requests = list(requests)
    if not requests:
        raise UndefinedResultError("SVR undefined over an empty request set")
    violations = 0
    for r in requests:
        if r.outcome in ("timeout", "dropped"):
            violations += 1
        elif r.outcome == "success" and r.latency_ms is not None \
                and r.latency_ms > sla_ms:
            violations += 1
    return violations / len(requests)


def compute_sr(requests) -> float:
    requests = list(requests)
    if not requests:
        raise UndefinedResultError("SR undefined over an empty request set")
    return sum(1 for r in requests if r.outcome == "success") / len(requests)


def latency_percentiles(requests) -> dict:
    """Nearest-rank percentiles over requests that have a latency."""
    lats = sorted(r.latency_ms for r in requests if r.latency_ms is not None)
    out = {}
    for name, q in LATENCY_QUANTILES:
        if not lats:
            out[name] = None
        else:
            idx = max(0, math.ceil(q * len(lats)) - 1)
            out[name] = lats[idx]
    return out


def compute_resource_totals(store_or_csv) -> dict:
    """Total CPU core-seconds and memory MB-seconds over a finished run."""
    store = store_or_csv
    if not isinstance(store, telemetry.MetricStore):
        store = telemetry.store_from_csv(store_or_csv)
    services = sorted({labels[0][1] for (name, labels) in store.series
                       if name == "container_cpu_usage_seconds_total"})
    if not services:
        raise IntegrityError("no container_cpu_usage_seconds_total series found")
    cpu_total = 0.0
    times = None
    for svc in services:
        ts, vs = store.samples("container_cpu_usage_seconds_total",
                               {"service": svc})
        if len(ts) < 2:
            raise IntegrityError("resource totals need at least two scrapes")
        for a, b in zip(vs, vs[1:]):
            if b < a:
                raise IntegrityError(
                    f"counter reset detected for container cpu of {svc}")
        cpu_total += vs[-1] - vs[0]
        times = ts if times is None else times
    # right-endpoint integral over the spans between scrapes, so an idle run
    # of 60 s at a constant 300 MB totals exactly 300*60 MB-seconds
    mem_mb_seconds = 0.0
    for i in range(1, len(times)):
        total_bytes = 0.0
        for svc in services:
            _, vs = store.samples("container_memory_usage_bytes", {"service": svc})
            total_bytes += vs[i]
        mem_mb_seconds += (total_bytes / 1048576.0) * (times[i] - times[i - 1])
    return {"cpu_total_core_seconds": cpu_total,
            "memory_total_mb_seconds": mem_mb_seconds}


def svr_from_store(store: telemetry.MetricStore, entry_service: str,
                   sla_ms: float) -> float:
    """SVR reconstructed from telemetry alone.

    Exact when sla_ms is a bucket bound: everything not in the <=sla bucket
    of the entry histogram (slow successes, timeouts, dropped requests in
    +Inf) is a violation.
    """
    le = telemetry._fmt_bound(sla_ms)
    ser = store.samples("istio_request_duration_milliseconds_bucket",
                        {"destination_service": entry_service, "le": le})
    inf = store.samples("istio_request_duration_milliseconds_bucket",
                        {"destination_service": entry_service, "le": "+Inf"})
    if ser is None or inf is None:
        raise IntegrityError(f"sla_ms {sla_ms} is not a histogram bucket bound")
    total = inf[1][-1]
    if total <= 0:
        raise UndefinedResultError("no entry-service observations")
    within = ser[1][-1]
    return (total - within) / total


# ------------------------------------------------------------------ report

def build_report(run_dir: str | Path) -> dict:
    """Assemble report.json and plot data from the artifacts in run_dir."""
    run_dir = Path(run_dir)
    for artifact in ("requests.csv", "metrics.csv", "actions.csv",
                     "run-meta.json"):
        if not (run_dir / artifact).exists():
            raise IntegrityError(f"missing artifact {artifact} in {run_dir}")
    meta = json.loads((run_dir / "run-meta.json").read_text(encoding="utf-8"))
    sla_ms = meta["benchmark"]["sla_ms"]
    label = meta["scaler"]["label"]

    requests = read_requests_csv(run_dir / "requests.csv")
    store = telemetry.store_from_csv(run_dir / "metrics.csv",
                                     meta.get("scrape_interval_s"))
    totals = compute_resource_totals(store)
    by_outcome = {"success": 0, "timeout": 0, "dropped": 0}
    for r in requests:
        by_outcome[r.outcome] = by_outcome.get(r.outcome, 0) + 1

    report = {
        "scaler_id": label,
        "svr": compute_svr(requests, sla_ms) if requests else None,
        "sr": compute_sr(requests) if requests else None,
        "cpu_total_core_seconds": totals["cpu_total_core_seconds"],
        "memory_total_mb_seconds": totals["memory_total_mb_seconds"],
        "requests": {
            "injected": len(requests),
            "success": by_outcome["success"],
            "timeout": by_outcome["timeout"],
            "dropped": by_outcome["dropped"],
        },
        "latency_ms": latency_percentiles(requests),
        "sla_ms": sla_ms,
    }
    (run_dir / "report.json").write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    _write_plot_data(run_dir, store, meta)
    return report


def _write_plot_data(run_dir: Path, store: telemetry.MetricStore,
                     meta: dict) -> None:
    plots = run_dir / "plots"
    plots.mkdir(exist_ok=True)
    entry = meta["benchmark"]["entry_service"]

    trace_path = run_dir / "trace.csv"
    if trace_path.exists():
        rows = trace_path.read_text(encoding="utf-8").splitlines()[1:]
        with open(plots / "users.csv", "w", encoding="utf-8", newline="\n") as f:
            f.write("t_s,user_count\n")
            for line in rows:
                if line.strip():
                    f.write(line.strip() + "\n")

    services = sorted({labels[0][1] for (name, labels) in store.series
                       if name == "kube_pod_info"})
    with open(plots / "replicas.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("t_s,service,ready_replicas\n")
        for svc in services:
            ts, vs = store.samples("kube_pod_info", {"service": svc})
            for t, v in zip(ts, vs):
                f.write(f"{t!r},{svc},{int(v)}\n")

    window = max(60.0, 2 * store.scrape_interval_s)
    with open(plots / "latency_p95.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("t_s,p95_ms\n")
        for t in store.scrape_times:
            p95 = telemetry.query_latency_quantile(store, entry, 0.95, window, t)
            f.write(f"{t!r},{'' if p95 is None else repr(p95)}\n")

    with open(plots / "cpu_rate.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("t_s,busy_cores\n")
        for t in store.scrape_times:
            r = telemetry.query_rate(store, "node_cpu_seconds_total",
                                     {"mode": "busy"}, window, t)
            f.write(f"{t!r},{'' if r is None else repr(r)}\n")


# -------------------------------------------------------------- comparison

_COMPARE_COLUMNS = ("scaler_id", "svr", "sr", "cpu_total_core_seconds",
                    "memory_total_mb_seconds", "injected", "status")


def build_comparison(rows: list[dict], out_dir: str | Path) -> Path:
    """rows: [{label, report or None, error or None}] -> comparison.csv/.md."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = []
    for row in sorted(rows, key=lambda r: r["label"]):
        rep = row.get("report")
        if rep is None:
            table.append({"scaler_id": row["label"], "svr": "", "sr": "",
                          "cpu_total_core_seconds": "",
                          "memory_total_mb_seconds": "", "injected": "",
                          "status": f"failed:{row.get('error', 'unknown')}"})
        else:
            table.append({
                "scaler_id": rep["scaler_id"],
                "svr": f"{rep['svr']:.4f}",
                "sr": f"{rep['sr']:.4f}",
                "cpu_total_core_seconds": f"{rep['cpu_total_core_seconds']:.2f}",
                "memory_total_mb_seconds": f"{rep['memory_total_mb_seconds']:.1f}",
                "injected": str(rep["requests"]["injected"]),
                "status": "ok",
            })
    csv_path = out_dir / "comparison.csv"
    with open(csv_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(_COMPARE_COLUMNS) + "\n")
        for r in table:
            f.write(",".join(r[c] for c in _COMPARE_COLUMNS) + "\n")
    md_path = out_dir / "comparison.md"
    with open(md_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("| " + " | ".join(_COMPARE_COLUMNS) + " |\n")
        f.write("|" + "---|" * len(_COMPARE_COLUMNS) + "\n")
        for r in table:
            f.write("| " + " | ".join(r[c] for c in _COMPARE_COLUMNS) + " |\n")
    return csv_path
