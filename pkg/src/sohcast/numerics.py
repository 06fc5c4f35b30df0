"""Dense tensor math, tape-based reverse-mode gradients, and Adam.

Tensors are numpy ndarrays (float32 in production; the same code runs
in float64 for oracle tests). A forward pass records one backward
closure per operation on a `Tape`; `backward` replays the closures in
exact reverse order, accumulating gradients into `Value.grad`.

Layer inputs are batched row-major: shape (batch, features).
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import ConfigError, TrainingInstabilityError, UsageError

Array = np.ndarray


class Mode(Enum):
    """Dropout behaviour: TRAIN and STOCHASTIC draw masks, DETERMINISTIC is identity."""

    TRAIN = "train"
    STOCHASTIC = "stochastic"
    DETERMINISTIC = "deterministic"


class Value:
    """An array tracked on a tape. Gradient is allocated lazily."""

    __slots__ = ("data", "grad")

    def __init__(self, data: Array):
        self.data = data
        self.grad: Array | None = None

    def add_grad(self, g: Array) -> None:
        if self.grad is None:
            self.grad = g.copy() if isinstance(g, np.ndarray) else np.asarray(g)
        else:
            self.grad += g


class Param(Value):
    """A named trainable tensor."""

    __slots__ = ("name", "trainable")

    def __init__(self, name: str, data: Array, trainable: bool = True):
        arr = np.asarray(data)
        # ascontiguousarray would promote 0-d scalars to shape (1,)
        super().__init__(arr.copy() if arr.ndim == 0 else np.ascontiguousarray(data))
        self.name = name
        self.trainable = trainable

    def zero_grad(self) -> None:
        self.grad = None


class Tape:
    """Execution-ordered record of backward closures."""

    def __init__(self):
        self._steps: list = []

    def record(self, fn) -> None:
        self._steps.append(fn)

    def backward(self, loss: Value) -> None:
        """Seed d(loss)/d(loss)=1 and sweep the tape in reverse."""
        if not self._steps:
            raise UsageError("backward called before any forward op was recorded")
        loss.grad = np.ones_like(loss.data)
        for fn in reversed(self._steps):
            fn()


class NullTape(Tape):
    """Tape that drops records; used for forward-only passes."""

    def record(self, fn) -> None:
        pass

    def backward(self, loss: Value) -> None:
        raise UsageError("cannot backward through a NullTape forward")


class LayerKind(Enum):
    LINEAR = "linear"
    LAYERNORM = "layernorm"


class LayerParams:
    """Weight/bias pair for a Linear or LayerNorm layer.

    Linear: weight has shape (out, in), y = x @ weight.T + bias.
    LayerNorm: weight is the per-feature gain, bias the shift.
    """

    def __init__(self, name: str, weight: Array, bias: Array, kind: LayerKind):
        weight = np.asarray(weight)
        bias = np.asarray(bias)
        if kind == LayerKind.LINEAR:
            if weight.ndim != 2 or bias.shape != (weight.shape[0],):
                raise ConfigError(f"{name}: linear weight must be 2-D with bias of length out_dim")
        else:
            if weight.shape != bias.shape or weight.ndim != 1:
                raise ConfigError(f"{name}: layernorm gain/bias must be 1-D and equal length")
        self.name = name
        self.weight = Param(f"{name}.weight", weight)
        self.bias = Param(f"{name}.bias", bias)
        self.kind = kind

    @property
    def params(self) -> list[Param]:
        return [self.weight, self.bias]


def linear_forward(tape: Tape, x: Value, p: LayerParams) -> Value:
    """y = x @ W.T + b for W of shape (out, in)."""
    w, b = p.weight, p.bias
    if x.data.shape[-1] != w.data.shape[1]:
        raise ConfigError(
            f"{p.name}: input dim {x.data.shape[-1]} != weight input dim {w.data.shape[1]}"
        )
    out = Value(x.data @ w.data.T + b.data)

    def bwd():
        g = out.grad
        x.add_grad(g @ w.data)
        w.add_grad(g.T @ x.data)
        b.add_grad(g.sum(axis=0))

    tape.record(bwd)
    return out


def layernorm_forward(tape: Tape, x: Value, p: LayerParams, eps: float = 1e-5) -> Value:
    """Row-wise normalization to zero mean / unit variance, then gain and shift.

    Statistics are computed in float64 (cast back to the model dtype) so
    the zero-mean guarantee survives badly scaled rows in float32.
    """
    xd = x.data
    x64 = xd.astype(np.float64, copy=False)
    mu = x64.mean(axis=-1, keepdims=True)
    var = x64.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = ((x64 - mu) * inv).astype(xd.dtype)
    out = Value(xhat * p.weight.data + p.bias.data)

    def bwd():
        g = out.grad
        gx = g * p.weight.data
        # d/dx of (x - mu) / sqrt(var + eps) with mu, var per row
        m1 = gx.mean(axis=-1, keepdims=True)
        m2 = (gx * xhat).mean(axis=-1, keepdims=True)
        x.add_grad(((gx - m1 - xhat * m2) * inv).astype(xd.dtype))
        p.weight.add_grad((g * xhat).sum(axis=0))
        p.bias.add_grad(g.sum(axis=0))

    tape.record(bwd)
    return out


class Activation(Enum):
    RELU = "relu"
    TANH = "tanh"


def activation(tape: Tape, x: Value, kind: Activation) -> Value:
    if kind == Activation.RELU:
        out = Value(np.maximum(x.data, 0))

        def bwd():
            x.add_grad(out.grad * (x.data > 0))

    else:
        out = Value(np.tanh(x.data))

        def bwd():
            x.add_grad(out.grad * (1.0 - out.data * out.data))

    tape.record(bwd)
    return out


def dropout(tape: Tape, x: Value, p: float, mode: Mode, rng: np.random.Generator | None) -> Value:
    """Zero each element with probability p, scaling survivors by 1/(1-p).

    DETERMINISTIC mode is the identity. TRAIN and STOCHASTIC share the
    masking behaviour; STOCHASTIC exists for repeated-inference
    uncertainty estimation.
    """
    if not 0.0 <= p < 1.0:
        raise ConfigError(f"dropout probability must be in [0, 1), got {p}")
    if mode == Mode.DETERMINISTIC or p == 0.0:
        out = Value(x.data)

        def bwd():
            x.add_grad(out.grad)

        tape.record(bwd)
        return out
    if rng is None:
        raise ConfigError("dropout in TRAIN/STOCHASTIC mode needs an rng")
    keep = (rng.random(x.data.shape) >= p).astype(x.data.dtype)
    scale = np.asarray(1.0 / (1.0 - p), x.data.dtype)
    out = Value(x.data * keep * scale)

    def bwd():
        x.add_grad(out.grad * keep * scale)

    tape.record(bwd)
    return out


def mean_broadcast(tape: Tape, x: Value, width: int) -> Value:
    """Per-row scalar mean of x, replicated across `width` columns."""
    m = x.data.mean(axis=-1, keepdims=True)
    out = Value(np.repeat(m, width, axis=-1))
    n = x.data.shape[-1]

    def bwd():
        x.add_grad(np.repeat(out.grad.sum(axis=-1, keepdims=True) / n, n, axis=-1))

    tape.record(bwd)
    return out


def mse_loss(tape: Tape, pred: Value, target: Array) -> Value:
    diff = pred.data - target
    out = Value(np.asarray((diff * diff).mean(), pred.data.dtype))

    def bwd():
        pred.add_grad(out.grad * 2.0 * diff / diff.size)

    tape.record(bwd)
    return out


def scale_add(tape: Tape, a: Value, ca: float, b: Value, cb: float) -> Value:
    """ca*a + cb*b for scalar Values (loss blending)."""
    ca = np.asarray(ca, a.data.dtype)
    cb = np.asarray(cb, a.data.dtype)
    out = Value(ca * a.data + cb * b.data)

    def bwd():
        a.add_grad(out.grad * ca)
        b.add_grad(out.grad * cb)

    tape.record(bwd)
    return out


class AdamState:
    """Adam with bias correction (beta1=0.9, beta2=0.999, eps=1e-8)."""

    def __init__(self, params: list[Param], lr: float = 1e-3):
        self.params = [p for p in params if p.trainable]
        self.lr = lr
        self.beta1, self.beta2, self.eps = 0.9, 0.999, 1e-8
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        """One update from the gradients accumulated on the params.

        Raises TrainingInstabilityError (before touching any state) if a
        gradient is non-finite, so a caller can drop the step and carry on.
        """
        grads = []
        for p in self.params:
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            if not np.all(np.isfinite(g)):
                raise TrainingInstabilityError(f"non-finite gradient for {p.name}")
            grads.append(g)
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1**self.t
        c2 = 1.0 - b2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * (g * g)
            p.data -= np.asarray(self.lr / c1, p.data.dtype) * (
                m / (np.sqrt(v / c2) + self.eps)
            ).astype(p.data.dtype)

    def zero_grads(self) -> None:
        for p in self.params:
            p.zero_grad()


def adam_step(params: list[Param], state: AdamState, lr: float | None = None) -> None:
    """Spec-surface wrapper: apply one Adam update to params with grads attached."""
    if lr is not None:
        state.lr = lr
    assert state.params == [p for p in params if p.trainable] or all(
        a is b for a, b in zip(state.params, [p for p in params if p.trainable])
    )
    state.step()


def check_finite(x: Array, what: str) -> Array:
    if not np.all(np.isfinite(x)):
        raise TrainingInstabilityError(f"non-finite values in {what}")
    return x


def finite_difference_grad(f, x: Array, eps: float = 1e-3) -> Array:
    """Central finite differences of scalar f at x (independent oracle)."""
    x = np.array(x, np.float64)  # owned copy: f must not see our perturbation buffer
    g = np.zeros_like(x)
    flat = x.ravel()
    gflat = g.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = float(f(x))
        flat[i] = orig - eps
        fm = float(f(x))
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * eps)
    return g


def grad_error(analytic: Array, numeric: Array) -> float:
    """Scale-normalized gradient disagreement used by the gradient checks."""
    a = np.asarray(analytic, np.float64).ravel()
    n = np.asarray(numeric, np.float64).ravel()
    denom = max(np.linalg.norm(a), np.linalg.norm(n), 1e-12)
    return float(np.linalg.norm(a - n) / denom)
