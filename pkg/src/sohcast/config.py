"""Pipeline configuration: one JSON document, unknown keys rejected."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .errors import ConfigError
from .selection import KAPPA_C, KAPPA_E, KAPPA_T, UtilityWeights


@dataclass
class SynthConfig:
    n_cells: int = 64
    n_cycles: int = 1000
    noise_sd: float = 0.005
    a_range: tuple = (5e-5, 2e-4)
    b_range: tuple = (3e-6, 1.5e-5)
    knee_range: tuple = (600.0, 900.0)

    def params(self) -> dict:
        return {"a_range": tuple(self.a_range), "b_range": tuple(self.b_range),
                "knee_range": tuple(self.knee_range), "noise_sd": self.noise_sd}


@dataclass
class DataConfig:
    source: str = "synth"  # synth | csv
    csv_path: str | None = None
    synth: SynthConfig = field(default_factory=SynthConfig)
    window: int = 100
    horizon: int = 100
    train_stride: int = 10
    test_stride: int | None = None  # None -> horizon (non-overlapping)
    test_fraction: float = 1 / 3


@dataclass
class TeacherConfig:
    hidden_dim: int = 128
    epochs: int = 200
    lr: float = 1e-3
    lr_min_factor: float = 1.0
    steps: int = 20
    t_end: float = 1.0
    dropout_p: float = 0.1
    batch_size: int = 32


@dataclass
class StudentConfig:
    dims: tuple = (2, 4, 8, 16, 32, 64, 128)
    rank: int = 4
    euler_steps: int = 8
    epochs: int = 200
    lr: float = 1e-3
    lr_min_factor: float = 1.0
    batch_size: int = 32
    dropout_p: float = 0.1


@dataclass
class DistillScheduleConfig:
    lambda_init: float = 0.1
    lambda_step: float = 0.004
    lambda_max: float = 0.9

    def __post_init__(self):
        if not (0.0 < self.lambda_init <= self.lambda_max < 1.0):
            raise ConfigError("need 0 < lambda_init <= lambda_max < 1")


@dataclass
class PruneConfig:
    sparsities: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@dataclass
class QuantConfig:
    calib_windows: int = 64
    golden_count: int = 16
    golden_seed: int = 0


@dataclass
class SelectionConfig:
    error_weights: dict = field(default_factory=lambda: dict(
        mae=1 / 6, rmse=1 / 6, mape_percent=1 / 6, uncertainty=1 / 4,
        one_minus_coverage=1 / 4))
    cost_weights: dict = field(default_factory=lambda: dict(
        model_size_bytes=0.5, latency_proxy_ms=0.2, energy_kwh=0.15, co2_kg=0.15))
    f_err_max: float = 0.25
    f_cst_max: float = 0.25
    eval_runs: int = 100
    timing_reps: int = 100
    kappa_e: float = KAPPA_E
    kappa_c: float = KAPPA_C
    kappa_t: float = KAPPA_T

    def weights(self) -> UtilityWeights:
        return UtilityWeights(error=dict(self.error_weights), cost=dict(self.cost_weights),
                              f_err_max=self.f_err_max, f_cst_max=self.f_cst_max)


@dataclass
class PipelineConfig:
    seed: int = 7
    out_dir: str = "runs/out"
    workers: int = 1
    data: DataConfig = field(default_factory=DataConfig)
    teacher: TeacherConfig = field(default_factory=TeacherConfig)
    students: StudentConfig = field(default_factory=StudentConfig)
    distill: DistillScheduleConfig = field(default_factory=DistillScheduleConfig)
    prune: PruneConfig = field(default_factory=PruneConfig)
    quant: QuantConfig = field(default_factory=QuantConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)

    def __post_init__(self):
        if self.data.source not in ("synth", "csv"):
            raise ConfigError(f"data.source must be 'synth' or 'csv', got {self.data.source!r}")
        if self.data.source == "csv" and not self.csv_path_ok():
            raise ConfigError("data.source 'csv' requires data.csv_path")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        self.selection.weights()  # validates weight groups and thresholds

    def csv_path_ok(self) -> bool:
        return bool(self.data.csv_path)

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {
    "data": (DataConfig, {"synth": SynthConfig}),
    "teacher": (TeacherConfig, {}),
    "students": (StudentConfig, {}),
    "distill": (DistillScheduleConfig, {}),
    "prune": (PruneConfig, {}),
    "quant": (QuantConfig, {}),
    "selection": (SelectionConfig, {}),
}


def _build(cls, payload: dict, nested: dict, where: str):
    if not isinstance(payload, dict):
        raise ConfigError(f"{where}: expected an object")
    fields = {f for f in cls.__dataclass_fields__}
    unknown = set(payload) - fields
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for key, value in payload.items():
        if key in nested:
            kwargs[key] = _build(nested[key], value, {}, f"{where}.{key}")
        elif isinstance(value, list):
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    return cls(**kwargs)


def load_config(path) -> PipelineConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(doc, where=str(path))


def config_from_dict(doc: dict, where: str = "config") -> PipelineConfig:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: top level must be an object")
    top_fields = set(PipelineConfig.__dataclass_fields__)
    unknown = set(doc) - top_fields
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for key, value in doc.items():
        if key in _SECTIONS:
            cls, nested = _SECTIONS[key]
            kwargs[key] = _build(cls, value, nested, f"{where}.{key}")
        else:
            kwargs[key] = value
    try:
        return PipelineConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
