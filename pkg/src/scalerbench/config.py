"""Experiment configuration: validation, defaulting, normalization.

A config is one JSON document.  ``run`` mode uses the ``scaler`` key,
``compare`` mode the ``scalers`` list; both share benchmark, trace, seed and
timing knobs.  The seed is mandatory — there is no wall-clock default, so a
config plus its seed fully determines every output byte.  Validation is not
fail-fast: it returns the complete list of problems.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .scalers import SCALER_IDS, default_label

DEFAULTS = {
    "scrape_interval_s": 5.0,
    "startup_delay_s": 10.0,
    "control_interval_s": 15.0,
    "user_model": {"mode": "closed_loop", "think_time_s": 1.0},
    "output_dir": "runs",
    "node_cores": 32.0,
    "node_memory_gb": 96.0,
}

_TOP_KEYS = {"benchmark", "trace", "seed", "scaler", "scalers", "user_model",
             "scrape_interval_s", "startup_delay_s", "output_dir", "sla_ms",
             "node_cores", "node_memory_gb"}
_USER_MODEL_KEYS = {"mode", "think_time_s", "request_rate_per_user"}
_SCALER_KEYS = {"id", "label", "params", "control_interval_s"}


@dataclass(frozen=True)
class ScalerSpec:
    id: str
    label: str
    params: dict = field(default_factory=dict)
    control_interval_s: float = 15.0


@dataclass(frozen=True)
class ExperimentConfig:
    benchmark: str
    trace: str
    seed: int
    scalers: tuple[ScalerSpec, ...]
    user_model: dict
    scrape_interval_s: float
    startup_delay_s: float
    output_dir: str
    sla_ms: float | None
    node_cores: float
    node_memory_gb: float
    normalized: dict = field(default_factory=dict, compare=False)

    @property
    def scaler(self) -> ScalerSpec:
        return self.scalers[0]

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.normalized, sort_keys=True).encode()).hexdigest()


def _check_scaler_entry(entry, where: str, defaults_ctrl: float,
                        scrape_interval: float, errors: list) -> ScalerSpec | None:
    if not isinstance(entry, dict):
        errors.append(f"{where}: must be an object")
        return None
    unknown = set(entry) - _SCALER_KEYS
    if unknown:
        errors.append(f"{where}: unknown keys {sorted(unknown)}")
        return None
    sid = entry.get("id")
    if sid not in SCALER_IDS:
        errors.append(f"{where}: unknown scaler id {sid!r}; "
                      f"known ids: {', '.join(SCALER_IDS)}")
        return None
    params = entry.get("params", {})
    if not isinstance(params, dict):
        errors.append(f"{where}: params must be an object")
        return None
    ctrl = float(entry.get("control_interval_s", defaults_ctrl))
    if ctrl <= 0:
        errors.append(f"{where}: control_interval_s must be > 0")
        return None
    k = round(ctrl / scrape_interval)
    if abs(k * scrape_interval - ctrl) > 1e-9 or k < 1:
        errors.append(f"{where}: control_interval_s must be a multiple of "
                      f"scrape_interval_s ({scrape_interval})")
        return None
    label = entry.get("label") or default_label(sid, params)
    return ScalerSpec(id=sid, label=label, params=params,
                      control_interval_s=ctrl)


def validate_config(path: str | Path, mode: str = "run",
                    overrides: dict | None = None):
    """Returns (ExperimentConfig, normalized dict) or raises ConfigError
    carrying every problem found."""
    path = Path(path)
    errors: list[str] = []
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: malformed JSON at line {exc.lineno}: "
                           f"{exc.msg}"]) from exc
    if not isinstance(doc, dict):
        raise ConfigError([f"{path}: config must be a JSON object"])

    doc = dict(doc)
    for key, value in (overrides or {}).items():
        if value is not None:
            doc[key] = value

    unknown = set(doc) - _TOP_KEYS
    if unknown:
        errors.append(f"unknown config keys {sorted(unknown)}")

    base = path.parent

    def resolve_file(key):
        value = doc.get(key)
        if value is None:
            errors.append(f"missing required key '{key}'")
            return None
        p = Path(value)
        if not p.is_absolute():
            p = base / p
        if not p.exists():
            errors.append(f"{key} file not found: {p}")
            return None
        return str(p)

    benchmark = resolve_file("benchmark")
    trace = resolve_file("trace")

    seed = doc.get("seed")
    if seed is None:
        errors.append("missing required key 'seed' (no wall-clock default: "
                      "runs must be reproducible)")
    elif not isinstance(seed, int):
        errors.append("seed must be an integer")

    scrape = doc.get("scrape_interval_s", DEFAULTS["scrape_interval_s"])
    if not isinstance(scrape, (int, float)) or scrape <= 0:
        errors.append("scrape_interval_s must be a positive number")
        scrape = DEFAULTS["scrape_interval_s"]
    startup = doc.get("startup_delay_s", DEFAULTS["startup_delay_s"])
    if not isinstance(startup, (int, float)) or startup < 0:
        errors.append("startup_delay_s must be >= 0")
        startup = DEFAULTS["startup_delay_s"]

    um = dict(DEFAULTS["user_model"])
    um_doc = doc.get("user_model", {})
    if not isinstance(um_doc, dict):
        errors.append("user_model must be an object")
    else:
        bad = set(um_doc) - _USER_MODEL_KEYS
        if bad:
            errors.append(f"user_model: unknown keys {sorted(bad)}")
        um.update({k: v for k, v in um_doc.items() if k in _USER_MODEL_KEYS})
    if um.get("mode") not in ("closed_loop", "open_loop"):
        errors.append("user_model.mode must be closed_loop or open_loop")

    sla_ms = doc.get("sla_ms")
    if sla_ms is not None and (not isinstance(sla_ms, (int, float)) or sla_ms <= 0):
        errors.append("sla_ms must be a positive number")

    scaler_specs: list[ScalerSpec] = []
    if mode == "run":
        if "scaler" not in doc:
            errors.append("missing required key 'scaler'")
        else:
            spec = _check_scaler_entry(doc["scaler"], "scaler",
                                       DEFAULTS["control_interval_s"], float(scrape),
                                       errors)
            if spec:
                scaler_specs.append(spec)
    else:
        entries = doc.get("scalers")
        if not isinstance(entries, list) or len(entries) < 2:
            errors.append("compare mode needs a 'scalers' list with >= 2 entries")
        else:
            seen_labels: dict[str, int] = {}
            for i, entry in enumerate(entries):
                spec = _check_scaler_entry(entry, f"scalers[{i}]",
                                           DEFAULTS["control_interval_s"],
                                           float(scrape), errors)
                if spec:
                    n = seen_labels.get(spec.label, 0)
                    seen_labels[spec.label] = n + 1
                    if n:
                        spec = ScalerSpec(spec.id, f"{spec.label}#{n + 1}",
                                          spec.params, spec.control_interval_s)
                    scaler_specs.append(spec)

    if errors:
        raise ConfigError(errors)

    output_dir = doc.get("output_dir", DEFAULTS["output_dir"])
    node_cores = float(doc.get("node_cores", DEFAULTS["node_cores"]))
    node_memory_gb = float(doc.get("node_memory_gb", DEFAULTS["node_memory_gb"]))

    normalized = {
        "benchmark": benchmark,
        "trace": trace,
        "seed": seed,
        "user_model": um,
        "scrape_interval_s": float(scrape),
        "startup_delay_s": float(startup),
        "output_dir": str(output_dir),
        "sla_ms": sla_ms,
        "node_cores": node_cores,
        "node_memory_gb": node_memory_gb,
        "scalers": [
            {"id": s.id, "label": s.label, "params": s.params,
             "control_interval_s": s.control_interval_s}
            for s in scaler_specs
        ],
    }
    cfg = ExperimentConfig(
        benchmark=benchmark, trace=trace, seed=seed,
        scalers=tuple(scaler_specs), user_model=um,
        scrape_interval_s=float(scrape), startup_delay_s=float(startup),
        output_dir=str(output_dir), sla_ms=sla_ms, node_cores=node_cores,
        node_memory_gb=node_memory_gb, normalized=normalized)
    return cfg, normalized
