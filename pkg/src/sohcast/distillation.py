"""Teacher training and joint-loss student distillation.

The student loss is lam*L_true + (1-lam)*L_distill with lam following
a linear per-epoch schedule (lambda_at). L_true is MSE against ground
truth; L_distill is MSE or cosine distance against the frozen teacher's
deterministic forecasts. One student per (hidden_dim, loss kind) pair
makes up the pool, so each distillation stage doubles the candidate
count across the two loss kinds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .compression import PruneMask, masked_grad_apply
from .data import stack_windows
from .errors import ConfigError, TrainingInstabilityError
from .models import Mode, StudentModel, TeacherModel, model_forward
from .numerics import AdamState, Tape, Value, mse_loss, scale_add
from .rng import make_rng, split_seed


class DistillKind(Enum):
    MSE = "mse"
    COSINE = "cosine"

    @property
    def code(self) -> str:
        return "M" if self is DistillKind.MSE else "C"

    @staticmethod
    def parse(text: str) -> "DistillKind":
        try:
            return DistillKind(text.lower())
        except ValueError:
            raise ConfigError(f"unknown distill loss kind: {text!r}") from None


@dataclass
class DistillConfig:
    lambda_init: float = 0.1
    lambda_step: float = 0.004
    lambda_max: float = 0.9
    epochs: int = 200
    distill_kind: DistillKind = DistillKind.MSE
    lr: float = 1e-3
    batch_size: int = 32
    lr_min_factor: float = 1.0  # cosine-decay floor; 1.0 = constant lr

    def __post_init__(self):
        # lambda_max == 1.0 is a documented test-only override that turns
        # training into plain regression; pipeline configs keep it < 1.
        if not (0.0 < self.lambda_init <= self.lambda_max <= 1.0):
            raise ConfigError("need 0 < lambda_init <= lambda_max <= 1")
        if self.lambda_step < 0:
            raise ConfigError("lambda_step must be >= 0")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("epochs must be >= 0 and batch_size >= 1")
        if not 0.0 < self.lr_min_factor <= 1.0:
            raise ConfigError("lr_min_factor must lie in (0, 1]")

    def lr_at(self, epoch: int) -> float:
        """Cosine decay from lr to lr*lr_min_factor across the epoch budget."""
        if self.lr_min_factor == 1.0 or self.epochs <= 1:
            return self.lr
        span = max(1, self.epochs - 1)
        f = self.lr_min_factor
        return self.lr * (f + (1 - f) * 0.5 * (1 + math.cos(math.pi * min(epoch, span) / span)))


@dataclass
class StudentRecord:
    """Ledger entry for one pool member."""

    id: str
    hidden_dim: int
    distill_kind: str
    sparsity: float = 0.0
    stage: int = 1
    status: str = "trained"
    diagnostic: str = ""
    checkpoint: str = ""
    params: int = 0
    flops: int = 0
    error_vector: object = None
    cost_vector: object = None
    f_err: float | None = None
    f_cst: float | None = None
    pareto: bool = False


@dataclass
class PoolEntry:
    id: str
    kind: DistillKind
    model: StudentModel
    sparsity: float = 0.0
    mask: object = None
    stage: int = 1


def lambda_at(epoch: int, cfg: DistillConfig) -> float:
    """Ground-truth loss weight at `epoch`: linear ramp, capped at lambda_max."""
    if epoch < 0:
        raise ConfigError("epoch must be >= 0")
    return min(cfg.lambda_init + epoch * cfg.lambda_step, cfg.lambda_max)


def distill_loss(y_s: np.ndarray, y_t: np.ndarray, kind: DistillKind) -> float:
    """Distillation distance between student and teacher forecasts.

    MSE: mean squared difference. Cosine: 1 - cos(y_s, y_t) per row
    (0 when either norm < 1e-12), averaged over rows.
    """
    y_s = np.atleast_2d(y_s)
    y_t = np.atleast_2d(y_t)
    if kind is DistillKind.MSE:
        d = y_s - y_t
        return float((d * d).mean())
    ns = np.linalg.norm(y_s, axis=1)
    nt = np.linalg.norm(y_t, axis=1)
    ok = (ns > 1e-12) & (nt > 1e-12)
    cos = np.zeros(y_s.shape[0])
    cos[ok] = (y_s[ok] * y_t[ok]).sum(axis=1) / (ns[ok] * nt[ok])
    loss = np.where(ok, 1.0 - cos, 0.0)
    return float(loss.mean())


def _cosine_loss_op(tape: Tape, pred: Value, target: np.ndarray) -> Value:
    p = pred.data
    t = target
    ns = np.linalg.norm(p, axis=1)
    nt = np.linalg.norm(t, axis=1)
    ok = (ns > 1e-12) & (nt > 1e-12)
    dot = (p * t).sum(axis=1)
    denom = np.where(ok, ns * nt, 1.0)
    cos = np.where(ok, dot / denom, 1.0)  # degenerate rows contribute 0 loss
    out = Value(np.asarray((1.0 - cos).mean(), p.dtype))
    B = p.shape[0]

    def bwd():
        g = out.grad
        # d(1-cos)/dp = -t/(|p||t|) + dot * p / (|p|^3 |t|), zero on degenerate rows
        inv = np.where(ok, 1.0 / denom, 0.0)[:, None]
        term = -t * inv + (dot / np.where(ok, ns * ns, 1.0))[:, None] * p * inv
        pred.add_grad((g / B) * np.where(ok[:, None], term, 0.0).astype(p.dtype))

    tape.record(bwd)
    return out


def distill_loss_op(tape: Tape, pred: Value, target: np.ndarray, kind: DistillKind) -> Value:
    if kind is DistillKind.MSE:
        return mse_loss(tape, pred, target)
    return _cosine_loss_op(tape, pred, target)


def total_loss(y_s, y_true, y_t, lam: float, kind: DistillKind) -> float:
    """lam * MSE(y_s, y_true) + (1 - lam) * distill(y_s, y_t)."""
    if not 0.0 < lam <= 1.0:
        raise ConfigError("lambda must be in (0, 1]")
    d = np.atleast_2d(y_s) - np.atleast_2d(y_true)
    return lam * float((d * d).mean()) + (1.0 - lam) * distill_loss(y_s, y_t, kind)


def _epoch_pass(model, X, Y, targets, cfg, lam, opt, order, drop_rng, mask) -> bool:
    """One training epoch; returns True when every step stayed finite."""
    ok = True
    for start in range(0, len(X), cfg.batch_size):
        sel = order[start:start + cfg.batch_size]
        xb, yb = X[sel], Y[sel]
        opt.zero_grads()
        try:
            tape = Tape()
            out = model.forward(xb, mode=Mode.TRAIN, rng=drop_rng, tape=tape)
            l_true = mse_loss(tape, out, yb)
            if targets is None:
                loss = l_true
            else:
                l_dist = distill_loss_op(tape, out, targets[sel], cfg.distill_kind)
                loss = scale_add(tape, l_true, lam, l_dist, 1.0 - lam)
            if not np.isfinite(loss.data):
                ok = False
                continue
            tape.backward(loss)
            if mask is not None:
                masked_grad_apply(model, mask)
            opt.step()
        except TrainingInstabilityError:
            ok = False
    return ok


def train_teacher(teacher: TeacherModel, train_windows, epochs: int, lr: float = 1e-3,
                  batch_size: int = 32, seed: int = 0, lr_min_factor: float = 1.0) -> None:
    """Accuracy-first regression training of the teacher (in place)."""
    X, Y = stack_windows(train_windows)
    cfg = DistillConfig(epochs=epochs, lr=lr, batch_size=batch_size,
                        lr_min_factor=lr_min_factor)
    opt = AdamState(teacher.params(), lr)
    shuffle_rng = make_rng(seed, "teacher", "shuffle")
    drop_rng = make_rng(seed, "teacher", "dropout")
    for epoch in range(epochs):
        opt.lr = cfg.lr_at(epoch)
        order = shuffle_rng.permutation(len(X))
        _epoch_pass(teacher, X, Y, None, cfg, 1.0, opt, order, drop_rng, None)


def train_student(teacher: TeacherModel, student: StudentModel, train_windows,
                  cfg: DistillConfig, seed: int = 0, record_id: str = "student",
                  mask: PruneMask | None = None, stage: int = 1,
                  sparsity: float = 0.0) -> StudentRecord:
    """Distill the frozen teacher into `student` (trained in place).

    The teacher is never updated; its forecasts are deterministic, so
    the per-epoch distillation targets are constant and computed up
    front. Three consecutive epochs with non-finite losses mark the
    record Failed (training continues for the rest of the pool).
    """
    record = StudentRecord(id=record_id, hidden_dim=student.hidden_dim,
                           distill_kind=cfg.distill_kind.value, sparsity=sparsity,
                           stage=stage, params=student.count_params(),
                           flops=student.count_flops())
    X, Y = stack_windows(train_windows)
    targets = model_forward(teacher, X, Mode.DETERMINISTIC).astype(student.dtype)
    opt = AdamState(student.params(), cfg.lr)
    shuffle_rng = make_rng(seed, "distill", record_id, "shuffle")
    drop_rng = make_rng(seed, "distill", record_id, "dropout")
    bad_streak = 0
    for epoch in range(cfg.epochs):
        lam = lambda_at(epoch, cfg)
        opt.lr = cfg.lr_at(epoch)
        order = shuffle_rng.permutation(len(X))
        ok = _epoch_pass(student, X, Y, targets, cfg, lam, opt, order, drop_rng, mask)
        if ok:
            bad_streak = 0
        else:
            bad_streak += 1
            if bad_streak >= 3:
                record.status = "failed"
                record.diagnostic = (
                    f"non-finite loss for 3 consecutive epochs (last at epoch {epoch})")
                return record
    return record


def generate_pool(dims, kinds, seed, *, window, horizon, rank=4, euler_steps=8,
                  t_end=1.0, dropout_p=0.1, alpha_init=1.0, beta_init=1.0) -> list[PoolEntry]:
    """One independently initialized student per (hidden_dim, loss kind)."""
    if not dims:
        raise ConfigError("student pool needs at least one hidden dim")
    entries = []
    for d in dims:
        d = int(d)
        if d < 2 or (d & (d - 1)) != 0:
            raise ConfigError(f"hidden dims must be powers of two >= 2, got {d}")
        for kind in kinds:
            sid = f"{kind.code}-{d}"
            model = StudentModel(window, horizon, hidden_dim=d, rank=rank,
                                 euler_steps=euler_steps, t_end=t_end,
                                 dropout_p=dropout_p, alpha_init=alpha_init,
                                 beta_init=beta_init,
                                 seed=split_seed(seed, "pool", sid))
            entries.append(PoolEntry(id=sid, kind=kind, model=model))
    return entries
