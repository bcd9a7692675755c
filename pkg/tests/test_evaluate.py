import json

import pytest

from scalerbench import telemetry
from scalerbench.engine import RequestRecord, build_simulation
from scalerbench.errors import IntegrityError, UndefinedResultError
from scalerbench.evaluate import (build_report, compute_resource_totals,
                                  compute_sr, compute_svr, latency_percentiles,
                                  read_requests_csv, write_requests_csv)

from conftest import single_service_topology


def _rec(i, latency_ms, outcome="success"):
    return RequestRecord(id=i, arrival_time_s=0.0,
                         completion_time_s=None if latency_ms is None else latency_ms / 1000.0,
                         latency_ms=latency_ms, outcome=outcome)


def test_svr_hand_counted_example():
    recs = [_rec(0, 100.0), _rec(1, 600.0), _rec(2, 400.0), _rec(3, 700.0)]
    assert compute_svr(recs, 500.0) == 0.5


def test_svr_all_fast_is_zero():
    recs = [_rec(i, 100.0) for i in range(5)]
    assert compute_svr(recs, 500.0) == 0.0


def test_svr_all_dropped_is_one():
    recs = [_rec(i, None, "dropped") for i in range(5)]
    assert compute_svr(recs, 500.0) == 1.0


def test_svr_boundary_latency_is_not_a_violation():
    assert compute_svr([_rec(0, 500.0)], 500.0) == 0.0


def test_svr_empty_is_undefined():
    with pytest.raises(UndefinedResultError):
        compute_svr([], 500.0)


def test_sr_mixed_outcomes():
    recs = [_rec(0, 100.0), _rec(1, 100.0), _rec(2, 10000.0, "timeout"),
            _rec(3, None, "dropped")]
    assert compute_sr(recs) == 0.5


def test_sr_extremes():
    assert compute_sr([_rec(0, 1.0)]) == 1.0
    assert compute_sr([_rec(0, 10000.0, "timeout")]) == 0.0
    with pytest.raises(UndefinedResultError):
        compute_sr([])


def test_latency_percentiles_nearest_rank():
    recs = [_rec(i, float(i + 1)) for i in range(100)]
    p = latency_percentiles(recs)
    assert p == {"p50": 50.0, "p90": 90.0, "p95": 95.0, "p99": 99.0}


def test_resource_totals_idle_run():
    # 3 idle replicas at 100 MB base over 60 s: cpu 0, memory 300*60 MB-s
    topo = single_service_topology(replicas=3, base_memory_mb=100.0,
                                   per_util_mb=50.0, max_replicas=10)
    sim = build_simulation(topo, seed=1)
    store = telemetry.MetricStore(scrape_interval_s=5.0)
    for k in range(13):
        sim.advance(k * 5.0)
        telemetry.scrape(sim, store, k * 5.0)
    totals = compute_resource_totals(store)
    assert totals["cpu_total_core_seconds"] == 0.0
    assert totals["memory_total_mb_seconds"] == pytest.approx(300.0 * 60.0)


def test_resource_totals_counter_difference():
    store = telemetry.MetricStore(scrape_interval_s=5.0)
    for t, v in ((0.0, 0.0), (5.0, 60.0), (10.0, 120.0)):
        store._append("container_cpu_usage_seconds_total", {"service": "s"}, t, v)
        store._append("container_memory_usage_bytes", {"service": "s"}, t, 0.0)
    assert compute_resource_totals(store)["cpu_total_core_seconds"] == 120.0


def test_resource_totals_single_scrape_rejected():
    store = telemetry.MetricStore(scrape_interval_s=5.0)
    store._append("container_cpu_usage_seconds_total", {"service": "s"}, 0.0, 0.0)
    store._append("container_memory_usage_bytes", {"service": "s"}, 0.0, 0.0)
    with pytest.raises(IntegrityError, match="two scrapes"):
        compute_resource_totals(store)


def test_resource_totals_detects_counter_reset():
    store = telemetry.MetricStore(scrape_interval_s=5.0)
    for t, v in ((0.0, 50.0), (5.0, 10.0)):
        store._append("container_cpu_usage_seconds_total", {"service": "s"}, t, v)
        store._append("container_memory_usage_bytes", {"service": "s"}, t, 0.0)
    with pytest.raises(IntegrityError, match="counter reset"):
        compute_resource_totals(store)


def test_requests_csv_roundtrip(tmp_path):
    recs = [_rec(0, 123.456), _rec(1, 10000.0, "timeout"),
            _rec(2, None, "dropped")]
    p = tmp_path / "requests.csv"
    assert write_requests_csv(recs, p) == 3
    back = read_requests_csv(p)
    assert back == recs


def _fake_run_dir(tmp_path, sla_ms=500.0):
    """Minimal artifact set for report building."""
    topo = single_service_topology(mu=100.0)
    sim = build_simulation(topo, seed=5)
    sim.configure_closed_loop(0.5)
    sim.set_user_target(10)
    store = telemetry.MetricStore(scrape_interval_s=5.0)
    for k in range(13):
        sim.advance(k * 5.0)
        telemetry.scrape(sim, store, k * 5.0)
    sim.set_user_target(0)
    sim.advance(70.0)
    telemetry.scrape(sim, store, 65.0) if False else None
    telemetry.export_csv(store, tmp_path / "metrics.csv")
    write_requests_csv(sim.finished_records(), tmp_path / "requests.csv")
    (tmp_path / "actions.csv").write_text(
        "tick_s,scaler_id,service,requested,clamped,status\n")
    (tmp_path / "trace.csv").write_text("offset_s,user_count\n0,10\n60,0\n")
    meta = {"scaler": {"label": "none"},
            "benchmark": {"entry_service": "svc", "sla_ms": sla_ms},
            "scrape_interval_s": 5.0}
    (tmp_path / "run-meta.json").write_text(json.dumps(meta))
    return tmp_path


def test_build_report_and_recomputation_oracle(tmp_path):
    run_dir = _fake_run_dir(tmp_path)
    report = build_report(run_dir)
    saved = json.loads((run_dir / "report.json").read_text())
    assert saved == report
    # SVR in the report equals an independent recomputation from requests.csv
    recs = read_requests_csv(run_dir / "requests.csv")
    assert report["svr"] == compute_svr(recs, 500.0)
    assert report["sr"] == compute_sr(recs)
    assert report["requests"]["injected"] == len(recs)
    for f in ("users.csv", "replicas.csv", "latency_p95.csv", "cpu_rate.csv"):
        assert (run_dir / "plots" / f).exists()


def test_report_is_pure_function_of_artifacts(tmp_path):
    run_dir = _fake_run_dir(tmp_path)
    build_report(run_dir)
    first = (run_dir / "report.json").read_bytes()
    build_report(run_dir)
    assert (run_dir / "report.json").read_bytes() == first


def test_build_report_missing_artifact_named(tmp_path):
    run_dir = _fake_run_dir(tmp_path)
    (run_dir / "actions.csv").unlink()
    with pytest.raises(IntegrityError, match="actions.csv"):
        build_report(run_dir)
