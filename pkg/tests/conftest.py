import json
from pathlib import Path

import pytest

from scalerbench.topology import CallEdge, ServiceSpec, ServiceTopology


def single_service_topology(mu=1.0, replicas=1, queue_capacity=10 ** 9,
                            timeout_ms=3.6e6, deterministic=False,
                            base_memory_mb=128.0, per_util_mb=64.0,
                            max_replicas=64) -> ServiceTopology:
    return ServiceTopology(
        name="single",
        services=(ServiceSpec(name="svc", service_rate_mu=mu,
                              initial_replicas=replicas,
                              queue_capacity=queue_capacity,
                              base_memory_mb=base_memory_mb,
                              memory_per_utilization_mb=per_util_mb,
                              max_replicas=max_replicas),),
        edges=(),
        entry_service="svc",
        sla_ms=500.0,
        timeout_ms=timeout_ms,
        deterministic_service_times=deterministic,
    )


def chain_topology() -> ServiceTopology:
    """Two-service chain used by initialization and determinism tests."""
    return ServiceTopology(
        name="chain",
        services=(
            ServiceSpec(name="front", service_rate_mu=50.0, queue_capacity=100,
                        max_replicas=10),
            ServiceSpec(name="back", service_rate_mu=80.0, queue_capacity=100,
                        max_replicas=10),
        ),
        edges=(CallEdge("front", "back", 1.0),),
        entry_service="front",
        sla_ms=500.0,
        timeout_ms=10000.0,
    )


@pytest.fixture
def tiny_benchmark(tmp_path):
    """A small on-disk benchmark (manifest + topology) plus a short trace."""
    topo = {
        "name": "tiny",
        "entry_service": "front",
        "sla_ms": 500.0,
        "timeout_ms": 10000.0,
        "services": [
            {"name": "front", "service_rate_mu": 100.0, "queue_capacity": 50,
             "max_replicas": 10},
            {"name": "back", "service_rate_mu": 200.0, "queue_capacity": 50,
             "max_replicas": 10},
        ],
        "edges": [
            {"caller": "front", "callee": "back", "calls_per_request": 1.0},
        ],
    }
    (tmp_path / "topology.json").write_text(json.dumps(topo))
    manifest = {"topology_path": "topology.json",
                "traffic": {"entry_route": "/", "gateway_label": "gw"}}
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    trace = "offset_s,user_count\n0,20\n30,40\n60,0\n"
    (tmp_path / "trace.csv").write_text(trace)
    return tmp_path


def write_config(tmp_path: Path, **extra) -> Path:
    cfg = {
        "benchmark": str(tmp_path / "manifest.json"),
        "trace": str(tmp_path / "trace.csv"),
        "seed": 11,
        "scaler": {"id": "none"},
        "output_dir": str(tmp_path / "out"),
    }
    cfg.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path
