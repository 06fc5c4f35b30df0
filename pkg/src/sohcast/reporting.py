"""Ledger CSV, Markdown summary tables, and front scatter data.

Column order is fixed and floats use 5 significant digits so reruns
diff cleanly. `wall_ms` is the only nondeterministic column; determinism
comparisons mask it.
"""

from __future__ import annotations

import io

from .distillation import StudentRecord

LEDGER_COLUMNS = [
    "stage", "id", "hidden_dim", "distill_kind", "sparsity", "status",
    "mae", "rmse", "mape_percent", "uncertainty", "coverage", "one_minus_coverage",
    "model_size_bytes", "latency_proxy_ms", "wall_ms", "energy_kwh", "co2_kg",
    "flops", "params", "f_err", "f_cst", "pareto", "diagnostic",
]

WALL_COLUMN = "wall_ms"


def _fmt(v) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.5g}"
    return str(v)


def record_row(r: StudentRecord) -> dict:
    row = {c: "" for c in LEDGER_COLUMNS}
    row.update(stage=r.stage, id=r.id, hidden_dim=r.hidden_dim,
               distill_kind=r.distill_kind, sparsity=r.sparsity, status=r.status,
               params=r.params, flops=r.flops, diagnostic=r.diagnostic,
               f_err=r.f_err, f_cst=r.f_cst, pareto=r.pareto)
    if r.error_vector is not None:
        ev = r.error_vector
        row.update(mae=ev.mae, rmse=ev.rmse, mape_percent=ev.mape_percent,
                   uncertainty=ev.uncertainty, coverage=ev.coverage,
                   one_minus_coverage=ev.one_minus_coverage)
    if r.cost_vector is not None:
        cv = r.cost_vector
        row.update(model_size_bytes=cv.model_size_bytes,
                   latency_proxy_ms=cv.latency_proxy_ms, wall_ms=cv.wall_ms,
                   energy_kwh=cv.energy_kwh, co2_kg=cv.co2_kg, flops=cv.flops)
    return row


def ledger_csv(records: list[StudentRecord]) -> str:
    out = io.StringIO()
    out.write(",".join(LEDGER_COLUMNS) + "\n")
    for r in records:
        row = record_row(r)
        out.write(",".join(_fmt(row[c]) for c in LEDGER_COLUMNS) + "\n")
    return out.getvalue()


def mask_wall_column(csv_text: str) -> str:
    """Ledger text with the wall-clock column blanked (determinism diffs)."""
    lines = csv_text.splitlines()
    header = lines[0].split(",")
    idx = header.index(WALL_COLUMN)
    out = [lines[0]]
    for line in lines[1:]:
        cells = line.split(",")
        cells[idx] = ""
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def front_scatter_csv(records: list[StudentRecord]) -> str:
    out = io.StringIO()
    out.write("stage,id,f_err,f_cst,pareto\n")
    for r in records:
        if r.f_err is None:
            continue
        out.write(f"{r.stage},{r.id},{_fmt(r.f_err)},{_fmt(r.f_cst)},{1 if r.pareto else 0}\n")
    return out.getvalue()


_SUMMARY_ROWS = [
    ("MAE", lambda r: r.error_vector.mae if r.error_vector else None),
    ("RMSE", lambda r: r.error_vector.rmse if r.error_vector else None),
    ("MAPE %", lambda r: r.error_vector.mape_percent if r.error_vector else None),
    ("Uncertainty", lambda r: r.error_vector.uncertainty if r.error_vector else None),
    ("Coverage %", lambda r: 100.0 * r.error_vector.coverage if r.error_vector else None),
    ("Latency ms (proxy)", lambda r: r.cost_vector.latency_proxy_ms if r.cost_vector else None),
    ("Size kB", lambda r: r.cost_vector.model_size_bytes / 1000.0 if r.cost_vector else None),
    ("Energy kWh", lambda r: r.cost_vector.energy_kwh if r.cost_vector else None),
    ("CO2 kg", lambda r: r.cost_vector.co2_kg if r.cost_vector else None),
]


def summary_table(title: str, records: list[StudentRecord]) -> str:
    """Markdown table, metrics as rows and models as columns (teacher first)."""
    cols = [r for r in records if r.status == "trained" and r.error_vector is not None]
    out = io.StringIO()
    out.write(f"## {title}\n\n")
    if not cols:
        out.write("(no evaluated candidates)\n\n")
        return out.getvalue()
    headers = ["Metric"] + [("%s*" % r.id) if r.pareto else r.id for r in cols]
    out.write("| " + " | ".join(headers) + " |\n")
    out.write("|" + "---|" * len(headers) + "\n")
    for label, getter in _SUMMARY_ROWS:
        cells = [label] + [_fmt(getter(r)) for r in cols]
        out.write("| " + " | ".join(cells) + " |\n")
    out.write("\n(*) Pareto front member.\n\n")
    return out.getvalue()


def markdown_report(stages: dict[str, list[StudentRecord]]) -> str:
    out = io.StringIO()
    out.write("# Pipeline report\n\n")
    for title, records in stages.items():
        out.write(summary_table(title, records))
    return out.getvalue()
