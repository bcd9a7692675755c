import json

import pytest

from scalerbench.benchmark import load_benchmark, reset_benchmark
from scalerbench.data import data_path
from scalerbench.errors import ManifestError

from conftest import chain_topology


def test_shipped_boutique_manifest():
    bench = load_benchmark(data_path("benchmarks/boutique/manifest.json"))
    assert len(bench.topology.services) == 11
    assert bench.topology.entry_service == "frontend"
    assert bench.topology.sla_ms == 500.0
    assert bench.traffic["gateway_label"] == "boutique-ingress"


def test_shipped_sockshop_manifest():
    bench = load_benchmark(data_path("benchmarks/sockshop/manifest.json"))
    assert len(bench.topology.services) == 13
    assert bench.topology.entry_service == "front-end"


def test_override_application(tiny_benchmark):
    manifest = json.loads((tiny_benchmark / "manifest.json").read_text())
    manifest["overrides"] = {"front": {"initial_replicas": 2, "max_replicas": 12}}
    p = tiny_benchmark / "manifest2.json"
    p.write_text(json.dumps(manifest))
    bench = load_benchmark(p)
    front = bench.topology.service("front")
    assert front.initial_replicas == 2
    assert front.max_replicas == 12
    # untouched services keep their declared parameters
    assert bench.topology.service("back").initial_replicas == 1


def test_override_unknown_target(tiny_benchmark):
    manifest = json.loads((tiny_benchmark / "manifest.json").read_text())
    manifest["overrides"] = {"ghost": {"initial_replicas": 2}}
    p = tiny_benchmark / "manifest2.json"
    p.write_text(json.dumps(manifest))
    with pytest.raises(ManifestError, match="unknown override target ghost"):
        load_benchmark(p)


def test_malformed_manifest_json_reports_position(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{"topology_path": ')
    with pytest.raises(ManifestError, match="line 1"):
        load_benchmark(p)


def test_unknown_manifest_key_rejected(tiny_benchmark):
    manifest = json.loads((tiny_benchmark / "manifest.json").read_text())
    manifest["replicas"] = 3
    p = tiny_benchmark / "manifest2.json"
    p.write_text(json.dumps(manifest))
    with pytest.raises(ManifestError, match="unknown manifest keys"):
        load_benchmark(p)


def test_reset_restores_initial_replicas():
    topo = chain_topology()
    sim = reset_benchmark(topo, seed=3)
    for svc in ("front", "back"):
        assert sim.replica_counts(svc)["ready"] == 1
    assert sim.clock_s == 0.0


def test_reset_gives_identical_trajectories():
    topo = chain_topology()

    def run(sim):
        sim.configure_closed_loop(0.5)
        sim.set_user_target(20)
        return sim.advance_to(120.0)

    first = run(reset_benchmark(topo, seed=99))
    # a completed run leaves no residue: a fresh reset reproduces it exactly
    second = run(reset_benchmark(topo, seed=99))
    assert first == second


def test_reset_idempotence():
    topo = chain_topology()
    a = reset_benchmark(topo, seed=5)
    b = reset_benchmark(topo, seed=5)
    names = a.service_names
    assert names == b.service_names
    for n in names:
        assert a.replica_counts(n) == b.replica_counts(n)
    assert a.request_totals() == b.request_totals()
