"""Bi-objective model evaluation and Pareto-front selection.

Five error aspects (MAE, RMSE, MAPE%, uncertainty, 1-coverage) and four
cost aspects (size, latency, energy, CO2) are min-max normalized across
the candidate pool (teacher excluded) and folded into two weighted
utilities f_err / f_cst. Threshold filtering drops candidates whose
utility exceeds the caps (strictly), then the Pareto front keeps every
candidate not dominated in minimization order.

Determinism note: wall-clock inference time is measured and reported,
but the latency aspect entering f_cst is a FLOPs-based proxy so that
selection (and therefore the whole pipeline) is reproducible bit for
bit. See CostVector.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import checkpoint
from .distillation import StudentRecord
from .errors import ConfigError, EvaluationError
from .models import Mode, model_forward, student_flops
from .quantization import QuantizedModel, quantized_forward, quantized_payload_size
from .rng import make_rng

# FLOPs -> cost conversions. kappa_e/kappa_c reproduce the reported
# energy/CO2 scale of compact forecasters of this family (about 3.9e-8
# kWh and 1.83e-8 kg for a 0.288 MFLOP forward); kappa_t anchors the
# latency proxy near 1.9 ms for the same model.
KAPPA_E = 1.35e-13  # kWh per FLOP
KAPPA_C = 0.47      # kg CO2 per kWh
KAPPA_T = 1.5e5     # FLOPs per ms (latency proxy)

ERROR_ASPECTS = ["mae", "rmse", "mape_percent", "uncertainty", "one_minus_coverage"]
COST_ASPECTS = ["model_size_bytes", "latency_proxy_ms", "energy_kwh", "co2_kg"]


@dataclass
class ErrorVector:
    mae: float
    rmse: float
    mape_percent: float
    uncertainty: float
    one_minus_coverage: float

    def __post_init__(self):
        for name in ERROR_ASPECTS:
            if getattr(self, name) < 0:
                raise EvaluationError(f"error aspect {name} must be >= 0")
        if not 0.0 <= self.one_minus_coverage <= 1.0:
            raise EvaluationError("one_minus_coverage must lie in [0, 1]")

    @property
    def coverage(self) -> float:
        return 1.0 - self.one_minus_coverage

    def aspect(self, name: str) -> float:
        return float(getattr(self, name))


@dataclass
class CostVector:
    model_size_bytes: float
    latency_proxy_ms: float       # deterministic: flops / KAPPA_T, used in f_cst
    energy_kwh: float
    co2_kg: float
    wall_ms: float = 0.0          # measured median; report-only
    flops: int = 0

    def aspect(self, name: str) -> float:
        return float(getattr(self, name))


@dataclass
class UtilityWeights:
    error: dict = field(default_factory=lambda: {
        "mae": 1 / 6, "rmse": 1 / 6, "mape_percent": 1 / 6,
        "uncertainty": 1 / 4, "one_minus_coverage": 1 / 4})
    cost: dict = field(default_factory=lambda: {
        "model_size_bytes": 0.5, "latency_proxy_ms": 0.2,
        "energy_kwh": 0.15, "co2_kg": 0.15})
    f_err_max: float = 0.25
    f_cst_max: float = 0.25

    def __post_init__(self):
        if set(self.error) != set(ERROR_ASPECTS) or set(self.cost) != set(COST_ASPECTS):
            raise ConfigError("utility weights must cover exactly the 5+4 aspects")
        for group, n in ((self.error, "error"), (self.cost, "cost")):
            if abs(sum(group.values()) - 1.0) > 1e-9:
                raise ConfigError(f"{n} weights must sum to 1")
        for t in (self.f_err_max, self.f_cst_max):
            if not 0.0 < t <= 1.0:
                raise ConfigError("thresholds must lie in (0, 1]")


def _point_metrics(pred: np.ndarray, truth: np.ndarray):
    err = pred.astype(np.float64) - truth.astype(np.float64)
    mae = float(np.abs(err).mean())
    rmse = float(np.sqrt((err * err).mean()))
    mape = float((np.abs(err) / np.abs(truth)).mean() * 100.0)
    return mae, rmse, mape


def eval_errors(model, test_windows, runs: int = 100, seed: int = 0,
                record_id: str = "model") -> ErrorVector:
    """Error aspects on held-out windows.

    Point metrics come from one deterministic forward per window.
    Uncertainty is the mean per-(window, step) sample SD across `runs`
    stochastic forwards; coverage is the fraction of ground-truth points
    inside the empirical [2.5, 97.5] percentile band of those runs.
    Quantized models have no stochastic path, so their band is
    degenerate (uncertainty 0, coverage counts exact hits only).
    """
    if runs < 2:
        raise ConfigError("uncertainty estimation needs runs >= 2")
    if not test_windows:
        raise EvaluationError("empty test set")
    X = np.stack([w.x for w in test_windows])
    Y = np.stack([w.y for w in test_windows]).astype(np.float64)

    if isinstance(model, QuantizedModel):
        pred = np.stack([quantized_forward(model, x) for x in X]).astype(np.float64)
        mae, rmse, mape = _point_metrics(pred, Y)
        inside = np.isclose(Y, pred, rtol=0.0, atol=0.0)
        return ErrorVector(mae, rmse, mape, 0.0, 1.0 - float(inside.mean()))

    pred = model_forward(model, X, Mode.DETERMINISTIC).astype(np.float64)
    mae, rmse, mape = _point_metrics(pred, Y)
    samples = np.empty((runs,) + Y.shape, np.float64)
    for r in range(runs):
        rng = make_rng(seed, "eval", record_id, r)
        samples[r] = model_forward(model, X, Mode.STOCHASTIC, rng=rng)
    uncertainty = float(samples.std(axis=0, ddof=1).mean())
    lo, hi = np.percentile(samples, [2.5, 97.5], axis=0)
    coverage = float(((Y >= lo) & (Y <= hi)).mean())
    return ErrorVector(mae, rmse, mape, uncertainty, 1.0 - coverage)


def eval_costs(model, timing_reps: int = 100, mask=None, kappa_e: float = KAPPA_E,
               kappa_c: float = KAPPA_C, kappa_t: float = KAPPA_T,
               sample_window=None) -> CostVector:
    """Cost aspects: exact serialized size, latency, energy/CO2 proxies."""
    if isinstance(model, QuantizedModel):
        size = quantized_payload_size(model)
        flops = student_flops(model.window, model.horizon, model.hidden_dim,
                              model.enc_width, model.dec_width, model.dec_mid,
                              model.rank, model.euler_steps)
        runner = (lambda: quantized_forward(model, sample_window)) if sample_window is not None else None
    else:
        size = checkpoint.serialized_size(model, mask)
        flops = model.count_flops()
        if sample_window is not None:
            x = np.asarray(sample_window, model.dtype)
            runner = lambda: model_forward(model, x, Mode.DETERMINISTIC)
        else:
            runner = None
    wall = 0.0
    if runner is not None and timing_reps > 0:
        times = []
        for _ in range(timing_reps):
            t0 = time.perf_counter()
            runner()
            times.append((time.perf_counter() - t0) * 1e3)
        wall = float(np.median(times))
    return CostVector(model_size_bytes=float(size), latency_proxy_ms=flops / kappa_t,
                      energy_kwh=flops * kappa_e, co2_kg=flops * kappa_e * kappa_c,
                      wall_ms=wall, flops=int(flops))


def _minmax(values: np.ndarray) -> np.ndarray:
    lo, hi = values.min(), values.max()
    if hi - lo < 1e-300:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def normalize_pool(records: list[StudentRecord], weights: UtilityWeights) -> list[StudentRecord]:
    """Fill f_err/f_cst on trained records via per-aspect min-max over the pool."""
    pool = [r for r in records if r.status == "trained"]
    if not pool:
        raise EvaluationError("no trained records to normalize")
    for group, aspects, out in (("error_vector", ERROR_ASPECTS, "f_err"),
                                ("cost_vector", COST_ASPECTS, "f_cst")):
        wmap = weights.error if out == "f_err" else weights.cost
        norm = np.zeros(len(pool))
        for name in aspects:
            raw = np.array([getattr(r, group).aspect(name) for r in pool])
            if not np.all(np.isfinite(raw)):
                bad = pool[int(np.argmax(~np.isfinite(raw)))].id
                raise EvaluationError(f"non-finite {name} for record {bad}")
            norm = norm + wmap[name] * _minmax(raw)
        for r, v in zip(pool, norm):
            setattr(r, out, float(v))
    return records


def filter_thresholds(records: list[StudentRecord], weights: UtilityWeights,
                      log=None) -> list[StudentRecord]:
    """Drop records with f_err > f_err_max or f_cst > f_cst_max (strict).

    An empty survivor set falls back to the unfiltered pool (logged) so
    the pipeline can still select a front.
    """
    pool = [r for r in records if r.status == "trained" and r.f_err is not None]
    kept = [r for r in pool
            if r.f_err <= weights.f_err_max and r.f_cst <= weights.f_cst_max]
    if not kept:
        if log is not None:
            log.warning("threshold filter removed every candidate; "
                        "falling back to the unfiltered pool")
        return pool
    return kept


def pareto_front(records: list[StudentRecord]) -> list[StudentRecord]:
    """Non-dominated subset in (f_err, f_cst) minimization order.

    S survives iff no S' has f_err <= and f_cst <= with one strict;
    exactly-equal points are all retained.
    """
    if any(r.f_err is None or r.f_cst is None for r in records):
        raise EvaluationError("pareto_front needs normalized utility points")
    pts = [(r.f_err, r.f_cst, i) for i, r in enumerate(records)]
    keep = set()
    best_cst = np.inf
    for e, group in _groupby_sorted(pts):
        gmin = min(c for c, _ in group)
        if gmin < best_cst:
            keep.update(i for c, i in group if c == gmin)
        best_cst = min(best_cst, gmin)
    return [r for i, r in enumerate(records) if i in keep]


def _groupby_sorted(pts):
    out = {}
    for e, c, i in pts:
        out.setdefault(e, []).append((c, i))
    for e in sorted(out):
        yield e, out[e]


def utility_point(record: StudentRecord):
    return (record.f_err, record.f_cst)
