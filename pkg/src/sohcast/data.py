"""SoH trajectory ingestion, synthetic generation, windowing and splits.

CSV schema: ``cell_id,cycle,soh`` with a mandatory header, UTF-8.
Cycles per cell must form the contiguous run 1..n (any row order in the
file); violations raise DataError naming the cell and cycle.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .models import SOH_MAX, ForecastWindow
from .rng import make_rng


@dataclass
class SoHSeries:
    """One cell's state-of-health trajectory, indexed by cycle starting at 1."""

    cell_id: str
    soh: np.ndarray

    def final_soh(self) -> float:
        return float(self.soh[-1])


@dataclass
class DatasetSplit:
    train: list[ForecastWindow]
    test: list[ForecastWindow]
    train_cells: list[str] = field(default_factory=list)
    test_cells: list[str] = field(default_factory=list)
    health_tags: dict = field(default_factory=dict)


def load_soh_csv(path) -> list[SoHSeries]:
    """Parse per-cell SoH series from a cell_id,cycle,soh CSV."""
    rows: dict[str, list[tuple[int, float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["cell_id", "cycle", "soh"]:
            raise DataError(f"{path}: expected header 'cell_id,cycle,soh', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            cell, cyc_s, soh_s = row[0].strip(), row[1].strip(), row[2].strip()
            try:
                cyc = int(cyc_s)
                soh = float(soh_s)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad cycle/soh value") from exc
            if not np.isfinite(soh) or soh <= 0.0 or soh > SOH_MAX:
                raise DataError(f"cell {cell} cycle {cyc}: soh {soh} outside (0, {SOH_MAX}]")
            rows.setdefault(cell, []).append((cyc, soh))

    series = []
    for cell in rows:
        entries = sorted(rows[cell])
        cycles = [c for c, _ in entries]
        for i in range(1, len(cycles)):
            if cycles[i] == cycles[i - 1]:
                raise DataError(f"cell {cell}: duplicate cycle {cycles[i]}")
            if cycles[i] != cycles[i - 1] + 1:
                raise DataError(f"cell {cell}: gap after cycle {cycles[i - 1]}")
        if cycles and cycles[0] != 1:
            raise DataError(f"cell {cell}: cycles must start at 1, got {cycles[0]}")
        series.append(SoHSeries(cell, np.array([s for _, s in entries], np.float32)))
    series.sort(key=lambda s: s.cell_id)
    return series


def save_soh_csv(path, series: list[SoHSeries]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell_id", "cycle", "soh"])
        for s in series:
            for i, v in enumerate(s.soh, start=1):
                writer.writerow([s.cell_id, i, f"{float(v):.6f}"])


DEFAULT_SYNTH_PARAMS = {
    "a_range": (5e-5, 2e-4),
    "b_range": (3e-6, 1.5e-5),
    "knee_range": (600.0, 900.0),
    "noise_sd": 0.005,
}

# Post-knee quadratics dive steeply; a dead cell saturates here instead
# of at 0 so percentage errors stay well-defined.
SOH_FLOOR = 0.05


def degradation_curve(n_cycles: int, a: float, b: float, knee: float) -> np.ndarray:
    """Noise-free SoH(c) = 1 - a*c - b*max(0, c-knee)^2 for c = 1..n."""
    c = np.arange(1, n_cycles + 1, dtype=np.float64)
    return 1.0 - a * c - b * np.maximum(0.0, c - knee) ** 2


def eol_cycle(a: float, b: float, knee: float, threshold: float = 0.8) -> float:
    """Closed-form cycle where the noise-free curve crosses `threshold`."""
    drop = 1.0 - threshold
    c_lin = drop / a
    if c_lin <= knee or b == 0.0:
        return c_lin
    # b*x^2 + a*(x + knee) - drop = 0 with x = c - knee
    disc = a * a - 4.0 * b * (a * knee - drop)
    return knee + (-a + np.sqrt(disc)) / (2.0 * b)


def synth_degradation(n_cells: int, n_cycles: int, params: dict | None = None,
                      seed: int = 0) -> list[SoHSeries]:
    """Generate capacity-fade-shaped SoH series with a per-cell knee."""
    p = dict(DEFAULT_SYNTH_PARAMS)
    p.update(params or {})
    series = []
    for i in range(n_cells):
        rng = make_rng(seed, "synth", i)
        a = rng.uniform(*p["a_range"])
        b = rng.uniform(*p["b_range"])
        knee = rng.uniform(*p["knee_range"])
        soh = degradation_curve(n_cycles, a, b, knee)
        if p["noise_sd"] > 0:
            soh = soh + rng.normal(0.0, p["noise_sd"], size=n_cycles)
        soh = np.clip(soh, SOH_FLOOR, SOH_MAX)
        series.append(SoHSeries(f"synth-{i:03d}", soh.astype(np.float32)))
    return series


def make_windows(series: SoHSeries | list[SoHSeries], window: int, horizon: int,
                 stride: int = 10) -> list[ForecastWindow]:
    """Slice (window, horizon) pairs at offsets 0, stride, 2*stride, ...

    A series of length L yields floor((L - window - horizon)/stride) + 1
    windows when L >= window + horizon, else none.
    """
    if stride < 1:
        raise ConfigError("stride must be >= 1")
    if isinstance(series, SoHSeries):
        series = [series]
    out = []
    for s in series:
        span = window + horizon
        if len(s.soh) < span:
            continue
        for off in range(0, len(s.soh) - span + 1, stride):
            out.append(ForecastWindow(x=s.soh[off:off + window],
                                      y=s.soh[off + window:off + span]))
    return out


def split_by_health(series: list[SoHSeries], test_fraction: float, seed: int = 0,
                    window: int = 100, horizon: int = 100, train_stride: int = 10,
                    test_stride: int | None = None) -> DatasetSplit:
    """Stratified by final SoH into high/medium/low tertiles; test cells
    are sampled per tertile so the test set spans all three ranges."""
    if len(series) < 3:
        raise ConfigError("need at least 3 cells to stratify by health range")
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError("test_fraction must be in (0, 1)")
    order = sorted(series, key=lambda s: (-s.final_soh(), s.cell_id))
    tertiles = np.array_split(np.arange(len(order)), 3)
    tags = ["high", "medium", "low"]
    rng = make_rng(seed, "split")
    test_ids: list[str] = []
    health_tags = {}
    for tag, idxs in zip(tags, tertiles):
        cells = [order[i].cell_id for i in idxs]
        for c in cells:
            health_tags[c] = tag
        k = max(1, int(round(len(cells) * test_fraction)))
        k = min(k, len(cells))
        picked = rng.choice(len(cells), size=k, replace=False)
        test_ids.extend(cells[j] for j in sorted(picked))
    test_set = set(test_ids)
    train_cells = [s.cell_id for s in series if s.cell_id not in test_set]
    if not train_cells:
        raise ConfigError("test_fraction leaves no training cells")
    test_stride = horizon if test_stride is None else test_stride
    train = make_windows([s for s in series if s.cell_id in set(train_cells)],
                         window, horizon, train_stride)
    test = make_windows([s for s in series if s.cell_id in test_set],
                        window, horizon, test_stride)
    return DatasetSplit(train=train, test=test, train_cells=sorted(train_cells),
                        test_cells=sorted(test_ids), health_tags=health_tags)


def stack_windows(windows: list[ForecastWindow]):
    """(X, Y) float32 matrices from a window list."""
    X = np.stack([w.x for w in windows]).astype(np.float32)
    Y = np.stack([w.y for w in windows]).astype(np.float32)
    return X, Y
