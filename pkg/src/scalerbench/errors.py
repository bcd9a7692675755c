"""Exception hierarchy shared across the package."""


class ScalerBenchError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(ScalerBenchError):
    """Invalid input data (topology, manifest, trace, config)."""


class TopologyError(ValidationError):
    pass


class ManifestError(ValidationError):
    pass


class TraceError(ValidationError):
    pass


class ConfigError(ValidationError):
    """Carries the complete list of problems found in a config file."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class LifecycleError(ScalerBenchError):
    """Illegal scaler lifecycle transition (register/scale/cancel)."""


class UnknownServiceError(ScalerBenchError):
    pass


class UnknownMetricError(ScalerBenchError):
    """Metric name not in the exported schema (distinct from an absent series)."""


class IntegrityError(ScalerBenchError):
    """Telemetry or artifact violates a structural guarantee (e.g. counter reset)."""


class UndefinedResultError(ScalerBenchError):
    """An indicator was requested over an empty input set."""


class StageError(ScalerBenchError):
    """A lifecycle stage of an experiment failed; carries the stage name."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
