#!/usr/bin/env python3
"""Regenerate the checked-in fixture bundle (deterministic).

Run from the repository root:  python3 embedded/fixture/regenerate.py
"""

from pathlib import Path

from sohcast.compression import magnitude_prune
from sohcast.data import split_by_health, synth_degradation
from sohcast.distillation import (DistillConfig, DistillKind, generate_pool,
                                  train_student, train_teacher)
from sohcast.models import TeacherModel
from sohcast.quantization import (calibrate, emit_embedded_source,
                                  make_golden_vectors, quantize_int8)

OUT = Path(__file__).resolve().parent
WINDOW, HORIZON = 24, 12


def main():
    cells = synth_degradation(12, 300, {"noise_sd": 0.004}, seed=2024)
    split = split_by_health(cells, 1 / 3, seed=2024, window=WINDOW, horizon=HORIZON,
                            train_stride=15)
    teacher = TeacherModel(WINDOW, HORIZON, hidden_dim=16, steps=10, seed=2024)
    train_teacher(teacher, split.train, epochs=30, lr=3e-3, seed=2024)
    entry = generate_pool([8], [DistillKind.MSE], 2024, window=WINDOW,
                          horizon=HORIZON)[0]
    cfg = DistillConfig(epochs=25, lambda_step=0.032, lr=3e-3)
    train_student(teacher, entry.model, split.train, cfg, seed=2024,
                  record_id=entry.id)
    pruned, mask = magnitude_prune(entry.model, 0.4)
    cfg2 = DistillConfig(epochs=10, lambda_step=0.08, lr=1e-3)
    train_student(teacher, pruned, split.train, cfg2, seed=2025,
                  record_id=entry.id + "-p0.4", mask=mask)
    ranges = calibrate(pruned, split.train[:48])
    qm = quantize_int8(pruned, ranges, sparsity=0.4)
    gv = make_golden_vectors(qm, split.train, 16, seed=2024)
    for name, text in emit_embedded_source(qm, gv).items():
        (OUT / name).write_text(text)
        print("wrote", OUT / name)


if __name__ == "__main__":
    main()
