"""Acceptance gate: one test per criterion, each printing a PASS line.

Criteria covered: queueing oracles (M/M/1 and Erlang-C), Little's law,
threshold-scaler arithmetic and monotonicity, the two qualitative
comparison patterns on both shipped benchmarks, byte-level determinism,
telemetry integrity, lifecycle safety, and the telemetry/request-log SVR
cross-check.  Exact numeric reproduction of the published comparison table
is deliberately NOT asserted anywhere: those were measurements of a real
cluster; the property-based patterns above are the substitutes.
"""

import json
import random
import time

import pytest

from scalerbench import telemetry
from scalerbench.config import validate_config
from scalerbench.data import data_path
from scalerbench.engine import build_simulation
from scalerbench.evaluate import read_requests_csv
from scalerbench.experiment import run_experiment
from scalerbench.framework import (ExecutorView, MonitorView, Scaler,
                                   ScalerHandle, TopologyInfo, register_scaler)
from scalerbench.scalers import KhpaConfig, khpa_desired
from scalerbench.topology import ServiceSpec, ServiceTopology
from scalerbench.workload import LoadTrace, UserModel, run_injection

from oracles import mm1_mean_response, mmc_mean_response, mmc_mean_wait

SCALER_MATRIX = (
    {"id": "none"},
    {"id": "khpa", "params": {"cpu_threshold": 0.2}},
    {"id": "khpa", "params": {"cpu_threshold": 0.5}},
    {"id": "khpa", "params": {"cpu_threshold": 0.8}},
    {"id": "pid"},
    {"id": "predictive"},
)
BENCHMARKS = ("boutique", "sockshop")
SEED = 42
RUN_WALL_LIMIT_S = 60.0


# ---------------------------------------------------------- shared fixtures

def _oracle_topology(replicas: int) -> ServiceTopology:
    # huge queue and timeout so nothing is censored in the oracle runs
    return ServiceTopology(
        name="oracle",
        services=(ServiceSpec(name="svc", service_rate_mu=1.0,
                              initial_replicas=replicas, queue_capacity=10 ** 9,
                              max_replicas=replicas),),
        edges=(), entry_service="svc", sla_ms=500.0, timeout_ms=3.6e9)


def _open_loop_run(lam: float, replicas: int, horizon_s: float, seed: int):
    sim = build_simulation(_oracle_topology(replicas), seed=seed)
    sim.configure_open_loop(lam)
    sim.set_user_target(1)
    t0 = time.perf_counter()
    sim.advance(horizon_s)
    wall = time.perf_counter() - t0
    stats = sim.span_stats("svc")
    recs = sim.finished_records()
    lats = [r.latency_ms / 1000.0 for r in recs if r.outcome == "success"]
    return {
        "wall_s": wall,
        "completed": len(lats),
        "mean_response_s": sum(lats) / len(lats),
        "mean_wait_s": stats["wait_sum_s"] / stats["started"],
        "area": sim.area_in_system("svc"),
        "horizon_s": horizon_s,
    }


@pytest.fixture(scope="module")
def mm1_run():
    # lambda=0.5, mu=1, c=1: ~120k requests
    return _open_loop_run(lam=0.5, replicas=1, horizon_s=240000.0, seed=SEED)


@pytest.fixture(scope="module")
def mmc_run():
    # lambda=2.4, mu=1, c=3: ~1.2M requests for a stable rho=0.8 mean wait
    return _open_loop_run(lam=2.4, replicas=3, horizon_s=500000.0, seed=1)


@pytest.fixture(scope="session")
def experiment_matrix(tmp_path_factory):
    """Every scaler on every shipped benchmark with the shipped trace."""
    root = tmp_path_factory.mktemp("acceptance")
    runs = {}
    for bench in BENCHMARKS:
        for scaler in SCALER_MATRIX:
            cfg_path = root / f"{bench}-{scaler['id']}-{len(runs)}.json"
            cfg_path.write_text(json.dumps({
                "benchmark": str(data_path(f"benchmarks/{bench}/manifest.json")),
                "trace": str(data_path("traces/diurnal_740.csv")),
                "seed": SEED,
                "scaler": scaler,
                "output_dir": str(root / bench / "pending"),
            }))
            cfg, _ = validate_config(cfg_path)
            label = cfg.scaler.label
            out = root / bench / label
            t0 = time.perf_counter()
            result = run_experiment(cfg, out_dir=out)
            wall = time.perf_counter() - t0
            runs[(bench, label)] = {"result": result, "wall_s": wall,
                                    "out": out, "config": cfg_path}
    return runs


# -------------------------------------------------------------- criterion 1

def test_criterion_01_queueing_oracle_mm1(mm1_run):
    expected = mm1_mean_response(0.5, 1.0)
    got = mm1_run["mean_response_s"]
    assert mm1_run["completed"] >= 100000
    assert abs(got - expected) / expected < 0.05
    assert mm1_run["wall_s"] < 30.0
    print(f"[criterion 1 PASS] M/M/1 mean response {got:.4f}s vs {expected:.4f}s "
          f"({mm1_run['completed']} requests in {mm1_run['wall_s']:.1f}s wall)")


def test_criterion_01_queueing_oracle_erlang_c(mmc_run):
    expected_wait = mmc_mean_wait(2.4, 1.0, 3)
    got_wait = mmc_run["mean_wait_s"]
    assert mmc_run["completed"] >= 100000
    assert abs(got_wait - expected_wait) / expected_wait < 0.05
    expected_resp = mmc_mean_response(2.4, 1.0, 3)
    got_resp = mmc_run["mean_response_s"]
    assert abs(got_resp - expected_resp) / expected_resp < 0.05
    print(f"[criterion 1 PASS] M/M/3 mean wait {got_wait:.4f}s vs Erlang-C "
          f"{expected_wait:.4f}s ({mmc_run['completed']} requests)")


# -------------------------------------------------------------- criterion 2

def test_criterion_02_littles_law(mm1_run, mmc_run):
    for name, run, lam in (("M/M/1", mm1_run, 0.5), ("M/M/3", mmc_run, 2.4)):
        time_avg_in_system = run["area"] / run["horizon_s"]
        lam_measured = run["completed"] / run["horizon_s"]
        predicted = lam_measured * run["mean_response_s"]
        assert abs(time_avg_in_system - predicted) / predicted < 0.05, name
        print(f"[criterion 2 PASS] Little's law {name}: time-avg N "
              f"{time_avg_in_system:.4f} vs lambda*W {predicted:.4f}")


# -------------------------------------------------------------- criterion 3

def test_criterion_03_khpa_arithmetic_and_monotonicity():
    cfg = KhpaConfig(cpu_threshold=0.5)
    assert khpa_desired(4, 0.50, cfg) == 4
    assert khpa_desired(2, 0.90, cfg) == 4
    assert khpa_desired(6, 0.10, cfg) == 2
    rng = random.Random(SEED)
    cfgs = {}
    for _ in range(10000):
        current = rng.randint(1, 60)
        util = rng.uniform(0.0, 1.5)
        a, b = rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)
        lo, hi = min(a, b), max(a, b)
        d_lo = khpa_desired(current, util,
                            cfgs.setdefault(lo, KhpaConfig(cpu_threshold=lo)))
        d_hi = khpa_desired(current, util,
                            cfgs.setdefault(hi, KhpaConfig(cpu_threshold=hi)))
        assert d_lo >= d_hi, (current, util, lo, hi)
    print("[criterion 3 PASS] khpa arithmetic exact; desired non-increasing "
          "in the threshold over 10000 random triples")


# -------------------------------------------------------------- criterion 4

def test_criterion_04_svr_reduction_pattern(experiment_matrix):
    active = [label for (b, label) in experiment_matrix if b == "boutique"
              and label != "none"]
    for bench in BENCHMARKS:
        none_svr = experiment_matrix[(bench, "none")]["result"].report["svr"]
        assert none_svr >= 0.7, (
            f"{bench}: NoneScaler must be overloaded (svr={none_svr:.3f})")
        for label in active:
            run = experiment_matrix[(bench, label)]
            svr = run["result"].report["svr"]
            reduction = none_svr - svr
            assert reduction >= 0.5, (bench, label, none_svr, svr)
            print(f"[criterion 4 PASS] {bench}/{label}: svr {svr:.4f} vs none "
                  f"{none_svr:.4f} (reduction {reduction:.2f} >= 0.5)")
    for (bench, label), run in experiment_matrix.items():
        assert run["wall_s"] < RUN_WALL_LIMIT_S, (bench, label, run["wall_s"])
    slowest = max(r["wall_s"] for r in experiment_matrix.values())
    print(f"[criterion 4 PASS] all {len(experiment_matrix)} experiments "
          f"< {RUN_WALL_LIMIT_S:.0f}s wall (slowest {slowest:.1f}s)")


# -------------------------------------------------------------- criterion 5

def test_criterion_05_cpu_vs_threshold_pattern(experiment_matrix):
    cpus = [experiment_matrix[("boutique", f"khpa-{t}")]["result"]
            .report["cpu_total_core_seconds"] for t in ("0.2", "0.5", "0.8")]
    for lower_threshold, higher_threshold in zip(cpus, cpus[1:]):
        assert higher_threshold <= lower_threshold * 1.10
    print(f"[criterion 5 PASS] boutique khpa cpu core-seconds non-increasing "
          f"in threshold within 10%: {[round(c) for c in cpus]}")


# -------------------------------------------------------------- criterion 6

def test_criterion_06_determinism(experiment_matrix, tmp_path):
    for bench, label in (("boutique", "khpa-0.5"), ("sockshop", "none")):
        first = experiment_matrix[(bench, label)]
        cfg, _ = validate_config(first["config"])
        repeat_dir = tmp_path / f"{bench}-{label}-repeat"
        run_experiment(cfg, out_dir=repeat_dir)
        for artifact in ("requests.csv", "metrics.csv", "actions.csv",
                         "report.json"):
            a = (first["out"] / artifact).read_bytes()
            b = (repeat_dir / artifact).read_bytes()
            assert a == b, (bench, label, artifact)
        print(f"[criterion 6 PASS] {bench}/{label}: byte-identical artifacts "
              "on repeat")


# -------------------------------------------------------------- criterion 7

def test_criterion_07_telemetry_integrity(experiment_matrix):
    for (bench, label), run in experiment_matrix.items():
        store = telemetry.store_from_csv(run["out"] / "metrics.csv")
        services = sorted({labels[0][1] for (name, labels) in store.series
                           if name == "kube_pod_info"})
        n = len(store.scrape_times)

        for (name, labels), (ts, vs) in store.series.items():
            if telemetry.METRIC_KINDS[name] == telemetry.COUNTER:
                assert all(y >= x for x, y in zip(vs, vs[1:])), \
                    (bench, label, name, labels)

        les = [telemetry._fmt_bound(b) for b in store.bucket_bounds_ms] + ["+Inf"]
        for svc in services:
            per_le = [store.samples("istio_request_duration_milliseconds_bucket",
                                    {"destination_service": svc, "le": le})[1]
                      for le in les]
            family = [store.samples("istio_requests_total",
                                    {"destination_service": svc,
                                     "response_code": c})[1]
                      for c in ("200", "408", "503")]
            for i in range(n):
                cums = [vs[i] for vs in per_le]
                assert all(y >= x for x, y in zip(cums, cums[1:]))
                assert cums[-1] == sum(vs[i] for vs in family)

        total = store.samples("node_memory_MemTotal_bytes", {})[1]
        free = store.samples("node_memory_MemFree_bytes", {})[1]
        mems = [store.samples("container_memory_usage_bytes",
                              {"service": svc})[1] for svc in services]
        busy = store.samples("node_cpu_seconds_total", {"mode": "busy"})[1]
        idle = store.samples("node_cpu_seconds_total", {"mode": "idle"})[1]
        cpus = [store.samples("container_cpu_usage_seconds_total",
                              {"service": svc})[1] for svc in services]
        for i in range(n):
            assert free[i] + sum(m[i] for m in mems) == total[i], \
                (bench, label, "free-memory identity", i)
            by_service = 0.0
            for c in cpus:
                by_service += c[i]
            assert busy[i] == by_service, (bench, label, "cpu cross-check", i)
            assert idle[i] >= 0.0
    print(f"[criterion 7 PASS] counter monotonicity, histogram cumulativity, "
          f"free-memory identity and cpu cross-check hold at every scrape of "
          f"all {len(experiment_matrix)} runs")


# -------------------------------------------------------------- criterion 8

def test_criterion_08_lifecycle(experiment_matrix):
    for (bench, label), run in experiment_matrix.items():
        meta = json.loads((run["out"] / "run-meta.json").read_text())
        lc = meta["lifecycle"]
        assert lc["registered_at"] == 0.0
        assert lc["cancelled_at"] == 1200.0
        actions = (run["out"] / "actions.csv").read_text().splitlines()[1:]
        for line in actions:
            tick = float(line.split(",")[0])
            assert 0.0 < tick < 1200.0, (bench, label, line)
    print(f"[criterion 8 PASS] all {len(experiment_matrix)} runs: one "
          "register, one cancel, every tick strictly between them")


class _ExplodingScaler(Scaler):
    def scale(self, monitor, executor, now_s):
        raise RuntimeError("deliberate fault")


def test_criterion_08_throwing_scaler_completes():
    topo = ServiceTopology(
        name="t", services=(ServiceSpec(name="svc", service_rate_mu=100.0,
                                        queue_capacity=100, max_replicas=5),),
        edges=(), entry_service="svc")
    sim = build_simulation(topo, seed=3)
    store = telemetry.MetricStore(scrape_interval_s=5.0)
    info = TopologyInfo.from_topology(topo)
    handle = ScalerHandle(_ExplodingScaler(), "exploding", 15.0, info)
    telemetry.scrape(sim, store, 0.0)
    register_scaler(handle, MonitorView(store, info, 0.0),
                    ExecutorView(sim, "exploding", handle.actions))
    trace = LoadTrace(steps=((0.0, 10), (60.0, 0)), duration_s=60.0)
    summary = run_injection(sim, trace, UserModel(), store, handle)
    assert summary["requests"] > 0  # the experiment completed
    assert handle.lifecycle_state == "cancelled"
    failed = [a for a in handle.actions if a.status == "failed:RuntimeError"]
    assert len(failed) == 3  # ticks at 15, 30, 45
    print(f"[criterion 8 PASS] deliberately-throwing scaler: run completed "
          f"with {len(failed)} failed ticks logged")


# -------------------------------------------------------------- criterion 9

def test_criterion_09_svr_cross_check(experiment_matrix):
    for (bench, label), run in experiment_matrix.items():
        requests = read_requests_csv(run["out"] / "requests.csv")
        sla_ms = json.loads((run["out"] / "run-meta.json").read_text()
                            )["benchmark"]["sla_ms"]
        violations_log = sum(
            1 for r in requests
            if r.outcome in ("timeout", "dropped")
            or (r.outcome == "success" and r.latency_ms > sla_ms))

        store = telemetry.store_from_csv(run["out"] / "metrics.csv")
        entry = json.loads((run["out"] / "run-meta.json").read_text()
                           )["benchmark"]["entry_service"]
        le = telemetry._fmt_bound(sla_ms)
        within = store.samples("istio_request_duration_milliseconds_bucket",
                               {"destination_service": entry, "le": le})[1][-1]
        total = store.samples("istio_request_duration_milliseconds_bucket",
                              {"destination_service": entry,
                               "le": "+Inf"})[1][-1]
        assert int(total) == len(requests), (bench, label)
        assert int(total - within) == violations_log, (bench, label)
    print(f"[criterion 9 PASS] SVR from requests.csv equals the "
          f"histogram/counter reconstruction exactly on all "
          f"{len(experiment_matrix)} runs")
