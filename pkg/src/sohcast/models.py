"""Forecasting models: the continuous-time teacher and Euler students.

Both share one windowed interface: a window of `window` past SoH values
in, `horizon` future SoH values out. The encoder embeds the window into
a hidden state, the dynamics block evolves it (fixed-step RK4 for the
teacher, explicit Euler with a low-rank state matrix for students), and
the decoder maps the evolved state to the forecast.
"""

from __future__ import annotations

import copy as _copy
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import ConfigError, InputError
from .numerics import (
    Activation,
    LayerKind,
    LayerParams,
    Mode,
    NullTape,
    Param,
    Tape,
    Value,
    activation,
    check_finite,
    dropout,
    layernorm_forward,
    linear_forward,
    mean_broadcast,
)
from .rng import make_rng

SOH_MIN, SOH_MAX = 0.0, 1.2


@dataclass
class ForecastWindow:
    """One training/evaluation sample: `x` past SoH values, `y` the future ones."""

    x: np.ndarray
    y: np.ndarray | None = None

    def validate(self, window: int, horizon: int) -> "ForecastWindow":
        if self.x.shape != (window,):
            raise InputError(f"window length {self.x.shape} != ({window},)")
        if not np.all(np.isfinite(self.x)):
            raise InputError("non-finite values in input window")
        if np.any(self.x <= SOH_MIN) or np.any(self.x > SOH_MAX):
            raise InputError("SoH values must lie in (0, 1.2]")
        if self.y is not None:
            if self.y.shape != (horizon,):
                raise InputError(f"horizon length {self.y.shape} != ({horizon},)")
            if not np.all(np.isfinite(self.y)):
                raise InputError("non-finite values in target window")
        return self


def _uniform(rng, lo, hi, shape, dtype):
    return rng.uniform(lo, hi, size=shape).astype(dtype)


def _linear(name, n_in, n_out, rng, dtype):
    bound = 1.0 / np.sqrt(n_in)
    w = _uniform(rng, -bound, bound, (n_out, n_in), dtype)
    return LayerParams(name, w, np.zeros(n_out, dtype), LayerKind.LINEAR)


def _norm(name, n, dtype):
    return LayerParams(name, np.ones(n, dtype), np.zeros(n, dtype), LayerKind.LAYERNORM)


class _ModelBase:
    """Weight containers and the shared encoder/decoder forward."""

    kind = "base"

    def __init__(self, window, horizon, hidden_dim, enc_width, dec_width, dec_mid,
                 dropout_p, dtype):
        if window < 1 or horizon < 1:
            raise ConfigError("window and horizon must be positive")
        if not 0.0 <= dropout_p < 1.0:
            raise ConfigError("dropout_p must be in [0, 1)")
        self.window = int(window)
        self.horizon = int(horizon)
        self.hidden_dim = int(hidden_dim)
        self.enc_width = int(enc_width if enc_width else 2 * hidden_dim)
        self.dec_width = int(dec_width if dec_width else 2 * hidden_dim)
        self.dec_mid = int(dec_mid if dec_mid else hidden_dim)
        self.dropout_p = float(dropout_p)
        self.dtype = dtype

    def _build_coder(self, rng):
        d = self.hidden_dim
        dt = self.dtype
        self.enc1 = _linear("enc1", self.window, self.enc_width, rng, dt)
        self.enc_norm1 = _norm("enc_norm1", self.enc_width, dt)
        self.enc2 = _linear("enc2", self.enc_width, d, rng, dt)
        self.enc_norm2 = _norm("enc_norm2", d, dt)
        self.dec1 = _linear("dec1", d, self.dec_width, rng, dt)
        self.dec_norm1 = _norm("dec_norm1", self.dec_width, dt)
        self.dec2 = _linear("dec2", self.dec_width, self.dec_mid, rng, dt)
        self.dec_norm2 = _norm("dec_norm2", self.dec_mid, dt)
        self.dec3 = _linear("dec3", self.dec_mid, self.horizon, rng, dt)

    def _coder_layers(self):
        return [self.enc1, self.enc_norm1, self.enc2, self.enc_norm2,
                self.dec1, self.dec_norm1, self.dec2, self.dec_norm2, self.dec3]

    def dynamics_params(self) -> list[Param]:
        raise NotImplementedError

    def params(self) -> list[Param]:
        out = []
        for layer in [self.enc1, self.enc_norm1, self.enc2, self.enc_norm2]:
            out.extend(layer.params)
        out.extend(self.dynamics_params())
        for layer in [self.dec1, self.dec_norm1, self.dec2, self.dec_norm2, self.dec3]:
            out.extend(layer.params)
        return out

    def prunable_params(self) -> list[Param]:
        raise NotImplementedError

    def count_params(self) -> int:
        return int(sum(p.data.size for p in self.params() if p.trainable))

    def copy(self):
        return _copy.deepcopy(self)

    def checksum(self) -> int:
        import zlib

        c = 0
        for p in self.params():
            c = zlib.crc32(np.ascontiguousarray(p.data).tobytes(), c)
        return c

    # Forward ----------------------------------------------------------------

    def _rollout(self, tape, h0: Value, u: Value) -> Value:
        raise NotImplementedError

    def forward(self, x, mode: Mode = Mode.DETERMINISTIC, rng=None, tape: Tape | None = None,
                capture: list | None = None):
        """Forecast for x of shape (window,) or (batch, window).

        `capture`, when given, collects the float activations at every
        quantization boundary (10 arrays) for calibration.
        """
        single = np.ndim(x) == 1
        xb = np.atleast_2d(np.asarray(x, self.dtype))
        if xb.shape[1] != self.window:
            raise InputError(f"expected input window of length {self.window}, got {xb.shape[1]}")
        if tape is None:
            tape = NullTape()
        cap = capture.append if capture is not None else (lambda a: None)

        xv = Value(xb)
        cap(xb)
        u = mean_broadcast(tape, xv, self.hidden_dim)

        h = linear_forward(tape, xv, self.enc1)
        cap(h.data)
        h = layernorm_forward(tape, h, self.enc_norm1)
        h = activation(tape, h, Activation.RELU)
        h = dropout(tape, h, self.dropout_p, mode, rng)
        cap(h.data)
        h = linear_forward(tape, h, self.enc2)
        cap(h.data)
        h = layernorm_forward(tape, h, self.enc_norm2)
        h = activation(tape, h, Activation.TANH)

        h = self._rollout(tape, h, u)
        cap(h.data)

        h = linear_forward(tape, h, self.dec1)
        cap(h.data)
        h = layernorm_forward(tape, h, self.dec_norm1)
        h = activation(tape, h, Activation.RELU)
        h = dropout(tape, h, self.dropout_p, mode, rng)
        cap(h.data)
        h = linear_forward(tape, h, self.dec2)
        cap(h.data)
        h = layernorm_forward(tape, h, self.dec_norm2)
        h = activation(tape, h, Activation.RELU)
        cap(h.data)
        y = linear_forward(tape, h, self.dec3)
        cap(y.data)

        if single:
            return Value(y.data[0]) if isinstance(tape, NullTape) else y
        return y

    def _coder_flops(self) -> int:
        return coder_flops(self.window, self.horizon, self.hidden_dim, self.enc_width,
                           self.dec_width, self.dec_mid)


class TeacherModel(_ModelBase):
    """High-capacity forecaster with learned continuous-time dynamics.

    dh/dt = -alpha*h + beta*tanh(W h + u), integrated over [0, t_end]
    with fixed-step classical RK4.
    """

    kind = "teacher"

    def __init__(self, window, horizon, hidden_dim=128, enc_width=None, dec_width=None,
                 dec_mid=None, t_end=1.0, steps=20, dropout_p=0.1, seed=0,
                 alpha_init=1.0, beta_init=1.0, dtype=np.float32):
        super().__init__(window, horizon, hidden_dim, enc_width, dec_width, dec_mid,
                         dropout_p, dtype)
        if steps < 1 or t_end <= 0:
            raise ConfigError("integration needs steps >= 1 and t_end > 0")
        self.t_end = float(t_end)
        self.steps = int(steps)
        rng = make_rng(seed, "teacher-init")
        d = hidden_dim
        bound = 1.0 / np.sqrt(d)
        self.alpha = Param("alpha", np.asarray(alpha_init, dtype))
        self.beta = Param("beta", np.asarray(beta_init, dtype))
        self.W = Param("W", _uniform(rng, -bound, bound, (d, d), dtype))
        self._build_coder(rng)

    def dynamics_params(self):
        return [self.alpha, self.beta, self.W]

    def prunable_params(self):
        return [l.weight for l in (self.enc1, self.enc2, self.dec1, self.dec2, self.dec3)] + [self.W]

    def dynamics_param_count(self) -> int:
        return self.hidden_dim * self.hidden_dim

    def _rollout(self, tape, h0: Value, u: Value) -> Value:
        dt = self.t_end / self.steps
        need = not isinstance(tape, NullTape)
        alpha = float(self.alpha.data)
        beta = float(self.beta.data)
        hT, saved = backend.rk4_fwd(h0.data, self.W.data, alpha, beta, dt, self.steps,
                                    u.data, need)
        check_finite(hT, "ode integration state")
        out = Value(hT)
        if need:
            model = self

            def bwd():
                gh0, ga, gb, gW, gu = backend.rk4_bwd(saved, model.W.data, alpha, beta,
                                                      dt, model.steps, out.grad)
                h0.add_grad(gh0)
                model.alpha.add_grad(np.asarray(ga, model.dtype))
                model.beta.add_grad(np.asarray(gb, model.dtype))
                model.W.add_grad(gW)
                u.add_grad(gu)

            tape.record(bwd)
        return out

    def count_flops(self) -> int:
        """FLOPs for one deterministic forward (multiply-add = 2, tanh/norm = 8/elem, relu = 1)."""
        d = self.hidden_dim
        stage = 2 * d * d + 12 * d
        return self._coder_flops() + self.steps * (4 * stage + 12 * d)


class StudentModel(_ModelBase):
    """Euler-discretized forecaster with a low-rank state matrix.

    State update: h <- h + dt * (-alpha*h + beta*tanh(W' h + u)) with
    W' = diag(w_diag) + U V^T / rank, applied as two rank-`rank`
    products (the dense W' is never materialized).
    """

    kind = "student"

    def __init__(self, window, horizon, hidden_dim, rank=4, euler_steps=8, t_end=1.0,
                 enc_width=None, dec_width=None, dec_mid=None, dropout_p=0.1, seed=0,
                 alpha_init=1.0, beta_init=1.0, dtype=np.float32):
        super().__init__(window, horizon, hidden_dim, enc_width, dec_width, dec_mid,
                         dropout_p, dtype)
        d = int(hidden_dim)
        if d < 2 or (d & (d - 1)) != 0:
            raise ConfigError(f"student hidden_dim must be a power of two >= 2, got {d}")
        if euler_steps < 1 or t_end <= 0:
            raise ConfigError("euler rollout needs steps >= 1 and t_end > 0")
        self.rank = max(1, min(int(rank), d - 1))
        self.euler_steps = int(euler_steps)
        self.t_end = float(t_end)
        self.dt = self.t_end / self.euler_steps
        rng = make_rng(seed, "student-init")
        bound = 1.0 / np.sqrt(d)
        self.alpha = Param("alpha", np.asarray(alpha_init, dtype))
        self.beta = Param("beta", np.asarray(beta_init, dtype))
        self.w_diag = Param("w_diag", _uniform(rng, -0.5, 0.0, (d,), dtype))
        self.U = Param("U", _uniform(rng, -bound, bound, (d, self.rank), dtype))
        self.V = Param("V", _uniform(rng, -bound, bound, (d, self.rank), dtype))
        self._build_coder(rng)

    def dynamics_params(self):
        return [self.alpha, self.beta, self.w_diag, self.U, self.V]

    def prunable_params(self):
        return [l.weight for l in (self.enc1, self.enc2, self.dec1, self.dec2, self.dec3)] + [
            self.w_diag, self.U, self.V]

    def dynamics_param_count(self) -> int:
        return self.hidden_dim + 2 * self.hidden_dim * self.rank

    def _rollout(self, tape, h0: Value, u: Value) -> Value:
        need = not isinstance(tape, NullTape)
        alpha = float(self.alpha.data)
        beta = float(self.beta.data)
        hK, saved = backend.euler_fwd(h0.data, self.w_diag.data, self.U.data, self.V.data,
                                      self.rank, alpha, beta, self.dt, self.euler_steps,
                                      u.data, need)
        check_finite(hK, "euler rollout state")
        out = Value(hK)
        if need:
            model = self

            def bwd():
                gh0, ga, gb, gwd, gU, gV, gu = backend.euler_bwd(
                    saved, model.w_diag.data, model.U.data, model.V.data, model.rank,
                    alpha, beta, model.dt, model.euler_steps, out.grad)
                h0.add_grad(gh0)
                model.alpha.add_grad(np.asarray(ga, model.dtype))
                model.beta.add_grad(np.asarray(gb, model.dtype))
                model.w_diag.add_grad(gwd)
                model.U.add_grad(gU)
                model.V.add_grad(gV)
                u.add_grad(gu)

            tape.record(bwd)
        return out

    def count_flops(self) -> int:
        return student_flops(self.window, self.horizon, self.hidden_dim, self.enc_width,
                             self.dec_width, self.dec_mid, self.rank, self.euler_steps)


def coder_flops(window, horizon, d, e1, e2, e3) -> int:
    """Encoder+decoder FLOPs for one deterministic forward.

    Conventions: multiply-add = 2 FLOPs (linear n->m costs 2nm + m with
    the bias add), LayerNorm = 8/element, tanh = 8/element, ReLU =
    1/element, dropout in deterministic mode = 0.
    """
    lin = lambda n, m: 2 * n * m + m
    total = window + 1  # input mean
    total += lin(window, e1) + 8 * e1 + e1
    total += lin(e1, d) + 8 * d + 8 * d
    total += lin(d, e2) + 8 * e2 + e2
    total += lin(e2, e3) + 8 * e3 + e3
    total += lin(e3, horizon)
    return total


def student_flops(window, horizon, d, e1, e2, e3, rank, euler_steps) -> int:
    """coder_flops plus euler_steps * (4*d*rank + 17*d + rank) for the rollout."""
    return coder_flops(window, horizon, d, e1, e2, e3) + euler_steps * (
        4 * d * rank + 17 * d + rank)


def teacher_dynamics_deriv(h, alpha, beta, W, u_bar):
    """-alpha*h + beta*tanh(W h + u_bar) for h of shape (d,) or (B, d)."""
    z = np.atleast_2d(h) @ np.asarray(W).T + u_bar
    out = -(alpha * np.atleast_2d(h)) + beta * np.tanh(z)
    return out[0] if np.ndim(h) == 1 else out


def lowrank_matvec(w_diag, U, V, rank, h):
    """diag(w_diag)h + U (V^T h)/rank in O(d*rank); h is (d,) or (B, d)."""
    hb = np.atleast_2d(np.asarray(h))
    res = backend.lowrank_apply(np.asarray(w_diag), np.asarray(U), np.asarray(V), rank, hb)
    return res[0] if np.ndim(h) == 1 else res


def model_forward(m: _ModelBase, x, mode: Mode = Mode.DETERMINISTIC, rng=None,
                  tape: Tape | None = None, capture: list | None = None):
    """Forecast `horizon` SoH values from a `window`-length input."""
    out = m.forward(x, mode=mode, rng=rng, tape=tape, capture=capture)
    return out.data if tape is None else out


def integrate_ode(m: TeacherModel, h0, u_bar):
    """Endpoint of the teacher ODE from h0 (no tape; test/oracle surface)."""
    hT, _ = backend.rk4_fwd(np.atleast_2d(np.asarray(h0, m.dtype)), m.W.data,
                            float(m.alpha.data), float(m.beta.data),
                            m.t_end / m.steps, m.steps,
                            np.atleast_2d(np.asarray(u_bar, m.dtype)), False)
    return hT[0] if np.ndim(h0) == 1 else hT


def euler_rollout(m: StudentModel, h0, u_bar):
    """Endpoint of the student Euler rollout from h0 (no tape; test surface)."""
    hK, _ = backend.euler_fwd(np.atleast_2d(np.asarray(h0, m.dtype)), m.w_diag.data,
                              m.U.data, m.V.data, m.rank, float(m.alpha.data),
                              float(m.beta.data), m.dt, m.euler_steps,
                              np.atleast_2d(np.asarray(u_bar, m.dtype)), False)
    return hK[0] if np.ndim(h0) == 1 else hK
