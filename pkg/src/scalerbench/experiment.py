"""One-command experiment orchestration.

run_experiment weaves the five evaluation stages into one workflow:
benchmark reset, scaler registration, trace-driven injection with control
ticks interleaved, cancel plus a 60 s drain sweep of scrapes, artifact
export, and report building.  run_comparison repeats it per scaler with the
identical benchmark, trace and seed so every scaler observes the same
initial conditions.
"""

from __future__ import annotations

import datetime
import json
import shutil
from dataclasses import dataclass
from pathlib import Path

from . import __version__, evaluate, telemetry, workload
from .benchmark import load_benchmark, reset_benchmark
from .config import ExperimentConfig, ScalerSpec
from .engine import KERNEL_BACKEND
from .errors import ScalerBenchError, StageError
from .framework import (MonitorView, ExecutorView, ScalerHandle, TopologyInfo,
                        register_scaler, write_actions_csv)
from .scalers import make_scaler
from .topology import ServiceTopology

DRAIN_WINDOW_S = 60.0


@dataclass
class RunResult:
    label: str
    out_dir: Path
    report: dict
    summary: dict


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _apply_sla_override(topology: ServiceTopology, sla_ms) -> ServiceTopology:
    if sla_ms is None or sla_ms == topology.sla_ms:
        return topology
    new = ServiceTopology(
        name=topology.name, services=topology.services, edges=topology.edges,
        entry_service=topology.entry_service, sla_ms=float(sla_ms),
        timeout_ms=topology.timeout_ms,
        deterministic_service_times=topology.deterministic_service_times)
    new.validate()
    return new


def run_experiment(cfg: ExperimentConfig, spec: ScalerSpec | None = None,
                   out_dir: str | Path | None = None) -> RunResult:
    """Execute one full evaluation; artifacts land in out_dir.

    Any stage failure raises StageError tagged with the stage name; the
    run-meta completion flag stays false for partial outputs.
    """
    spec = spec or cfg.scaler
    out_dir = Path(out_dir if out_dir is not None else cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stages: dict[str, str] = {}
    meta_path = out_dir / "run-meta.json"

    def checkpoint(stage: str):
        stages[stage] = _now()

    stage = "benchmark-init"
    try:
        checkpoint("benchmark-init:start")
        bench = load_benchmark(cfg.benchmark)
        topology = _apply_sla_override(bench.topology, cfg.sla_ms)
        trace = workload.load_trace(cfg.trace)
        model = workload.UserModel(**cfg.user_model)
        model.validate()
        sim = reset_benchmark(topology, cfg.seed, cfg.startup_delay_s)
        store = telemetry.MetricStore(
            scrape_interval_s=cfg.scrape_interval_s,
            node_cores=cfg.node_cores,
            node_memory_bytes=int(cfg.node_memory_gb * 1024 ** 3))

        meta = {
            "schema": "scalerbench-run-meta/1",
            "package_version": __version__,
            "kernel_backend": KERNEL_BACKEND,
            "config_hash": cfg.config_hash(),
            "seed": cfg.seed,
            "scaler": {"id": spec.id, "label": spec.label, "params": spec.params,
                       "control_interval_s": spec.control_interval_s},
            "benchmark": {"name": topology.name, "manifest": str(cfg.benchmark),
                          "entry_service": topology.entry_service,
                          "sla_ms": topology.sla_ms,
                          "timeout_ms": topology.timeout_ms,
                          "traffic": bench.traffic},
            "user_model": cfg.user_model,
            "scrape_interval_s": cfg.scrape_interval_s,
            "startup_delay_s": cfg.startup_delay_s,
            "completed": False,
        }
        meta_path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n",
                             encoding="utf-8")
        # initial conditions are captured before the scaler can act
        telemetry.scrape(sim, store, 0.0)
        checkpoint("benchmark-init:done")

        stage = "scaler-registration"
        scaler = make_scaler(spec.id, spec.params)
        handle = ScalerHandle(scaler, spec.label, spec.control_interval_s,
                              TopologyInfo.from_topology(topology))
        monitor = MonitorView(store, handle.info, 0.0)
        executor = ExecutorView(sim, spec.label, handle.actions)
        register_scaler(handle, monitor, executor)
        checkpoint("scaler-registration:done")

        stage = "workload-injection"
        summary = workload.run_injection(sim, trace, model, store, handle)
        checkpoint("workload-injection:done")

        stage = "metric-collection"
        t = trace.duration_s
        end = t + DRAIN_WINDOW_S
        while t < end - 1e-9:
            t = round(t + cfg.scrape_interval_s, 9)
            sim.advance(t)
            telemetry.scrape(sim, store, t)
        telemetry.export_csv(store, out_dir / "metrics.csv")
        evaluate.write_requests_csv(sim.finished_records(),
                                    out_dir / "requests.csv")
        write_actions_csv(handle.actions, out_dir / "actions.csv")
        shutil.copyfile(cfg.trace, out_dir / "trace.csv")
        checkpoint("metric-collection:done")

        stage = "performance-assessment"
        meta["injection_summary"] = summary
        meta["final_totals"] = sim.request_totals()
        meta["lifecycle"] = {
            "registered_at": handle.registered_at,
            "cancelled_at": handle.cancelled_at,
            "ticks": len(handle.tick_times),
        }
        meta["stage_timestamps"] = stages
        meta_path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n",
                             encoding="utf-8")
        report = evaluate.build_report(out_dir)
        checkpoint("performance-assessment:done")

        meta["stage_timestamps"] = stages
        meta["completed"] = True
        meta_path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n",
                             encoding="utf-8")
        return RunResult(label=spec.label, out_dir=out_dir, report=report,
                         summary=summary)
    except ScalerBenchError as exc:
        raise StageError(stage, exc) from exc


def run_comparison(cfg: ExperimentConfig,
                   out_dir: str | Path | None = None) -> dict:
    """Run every configured scaler under identical initial conditions.

    Each scaler gets an isolated state (fresh reset, same seed) and its own
    subdirectory; one run failing marks its row failed while the others
    complete.
    """
    out_dir = Path(out_dir if out_dir is not None else cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for spec in cfg.scalers:
        sub = out_dir / spec.label
        try:
            result = run_experiment(cfg, spec=spec, out_dir=sub)
            rows.append({"label": spec.label, "report": result.report})
        except StageError as exc:
            rows.append({"label": spec.label, "report": None,
                         "error": f"{exc.stage}:{type(exc.cause).__name__}"})
    evaluate.build_comparison(rows, out_dir)
    ok = sum(1 for r in rows if r["report"] is not None)
    return {"rows": rows, "out_dir": out_dir, "succeeded": ok,
            "failed": len(rows) - ok}
