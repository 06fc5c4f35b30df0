"""Post-training int8 quantization, simulator, and embedded C emission.

Scheme: per-tensor symmetric weights (zero_point 0, scale max|w|/127),
per-boundary affine activations calibrated from float forwards. Linear
layers run as int8 x int8 -> int32 accumulation; bias add, LayerNorm,
ReLU, tanh and the Euler state update run in float64 on dequantized
values; every boundary requantizes with round-half-away-from-zero.

All float64 arithmetic on this path uses exactly-ordered reductions and
the portable exp/tanh from the backend, so the emitted C kernel
reproduces every int8 boundary tensor bit for bit. Golden vectors are
produced by `quantized_forward` itself; emission only formats them.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import backend
from .errors import ConfigError, EmissionError, InputError
from .models import Mode, StudentModel
from .rng import make_rng

N_BOUNDARIES = 10
BOUNDARY_NAMES = [
    "input", "enc_expand", "enc_embed_in", "enc_embed", "state_out",
    "dec_expand", "dec_mid_in", "dec_mid", "dec_head_in", "output",
]
# Tensor blamed when a boundary mismatches in conformance reports.
BOUNDARY_TENSOR = [
    "input", "w_enc1", "enc_norm1", "w_enc2", "dynamics",
    "w_dec1", "dec_norm1", "w_dec2", "dec_norm2", "w_dec3",
]
WEIGHT_ORDER = ["w_enc1", "w_enc2", "w_dec1", "w_dec2", "w_dec3", "w_diag", "u_lr", "v_lr"]
LN_EPS = 1e-5


class QuantScheme(Enum):
    SYMMETRIC_WEIGHT = "symmetric_weight"
    AFFINE_ACTIVATION = "affine_activation"


@dataclass
class QuantParams:
    scale: float
    zero_point: int
    scheme: QuantScheme

    def __post_init__(self):
        if self.scale <= 0:
            raise ConfigError("quantization scale must be positive")
        if self.scheme is QuantScheme.SYMMETRIC_WEIGHT and self.zero_point != 0:
            raise ConfigError("symmetric weight scheme requires zero_point 0")
        if not -128 <= self.zero_point <= 127:
            raise ConfigError("zero_point outside int8 range")


@dataclass
class QuantizedModel:
    window: int
    horizon: int
    hidden_dim: int
    enc_width: int
    dec_width: int
    dec_mid: int
    rank: int
    euler_steps: int
    dt: float
    alpha: float
    beta: float
    sparsity: float
    weights: dict            # name -> int8 ndarray
    weight_q: dict           # name -> QuantParams (symmetric)
    biases: dict             # name -> float32 ndarray
    norms: dict              # name -> (gain float32, bias float32)
    act: list = field(default_factory=list)  # QuantParams per boundary

    def widths(self):
        return {
            "w_enc1": (self.enc_width, self.window),
            "w_enc2": (self.hidden_dim, self.enc_width),
            "w_dec1": (self.dec_width, self.hidden_dim),
            "w_dec2": (self.dec_mid, self.dec_width),
            "w_dec3": (self.horizon, self.dec_mid),
            "w_diag": (self.hidden_dim,),
            "u_lr": (self.hidden_dim, self.rank),
            "v_lr": (self.hidden_dim, self.rank),
        }


@dataclass
class GoldenVectors:
    seed: int
    inputs: np.ndarray        # (count, window) float32
    boundaries: list          # per vector: list of 10 int8 arrays
    outputs: np.ndarray       # (count, horizon) float32


def calibrate(model: StudentModel, calib_windows) -> list[tuple[float, float]]:
    """Per-boundary (min, max) of float activations, widened to include 0."""
    if len(calib_windows) == 0:
        raise ConfigError("calibration set must be nonempty")
    X = np.stack([w.x for w in calib_windows]).astype(model.dtype)
    captured: list = []
    model.forward(X, mode=Mode.DETERMINISTIC, capture=captured)
    if len(captured) != N_BOUNDARIES:
        raise ConfigError(f"expected {N_BOUNDARIES} boundary captures, got {len(captured)}")
    return [(min(float(a.min()), 0.0), max(float(a.max()), 0.0)) for a in captured]


def range_to_qparams(lo: float, hi: float) -> QuantParams:
    """Affine activation params: scale (hi-lo)/255, zp anchored at -128."""
    span = hi - lo
    if span < 1e-12:
        return QuantParams(1.0, 0, QuantScheme.AFFINE_ACTIVATION)
    scale = span / 255.0
    zp = int(np.clip(backend.round_away(-128.0 - lo / scale), -128, 127))
    return QuantParams(scale, zp, QuantScheme.AFFINE_ACTIVATION)


def weight_qparams(w: np.ndarray) -> QuantParams:
    """Symmetric per-tensor params; all-zero tensors get scale 1 (degenerate)."""
    m = float(np.abs(w).max()) if w.size else 0.0
    return QuantParams(m / 127.0 if m > 0 else 1.0, 0, QuantScheme.SYMMETRIC_WEIGHT)


def _quant_weight(w: np.ndarray, qp: QuantParams) -> np.ndarray:
    q = backend.round_away(np.asarray(w, np.float64) / qp.scale)
    return np.clip(q, -127, 127).astype(np.int8)


def quantize_int8(model: StudentModel, ranges, sparsity: float = 0.0) -> QuantizedModel:
    """Freeze a student into int8 weights + affine activation params.

    Pruned zeros quantize to exactly 0 (0/scale rounds to 0).
    """
    if len(ranges) != N_BOUNDARIES:
        raise ConfigError("activation ranges must cover every boundary")
    tensors = {
        "w_enc1": model.enc1.weight.data,
        "w_enc2": model.enc2.weight.data,
        "w_dec1": model.dec1.weight.data,
        "w_dec2": model.dec2.weight.data,
        "w_dec3": model.dec3.weight.data,
        "w_diag": model.w_diag.data,
        "u_lr": model.U.data,
        "v_lr": model.V.data,
    }
    weights, weight_q = {}, {}
    for name, w in tensors.items():
        qp = weight_qparams(w)
        weights[name] = _quant_weight(w, qp)
        weight_q[name] = qp
    biases = {
        "b_enc1": model.enc1.bias.data.astype(np.float32),
        "b_enc2": model.enc2.bias.data.astype(np.float32),
        "b_dec1": model.dec1.bias.data.astype(np.float32),
        "b_dec2": model.dec2.bias.data.astype(np.float32),
        "b_dec3": model.dec3.bias.data.astype(np.float32),
    }
    norms = {
        "norm1": (model.enc_norm1.weight.data.astype(np.float32),
                  model.enc_norm1.bias.data.astype(np.float32)),
        "norm2": (model.enc_norm2.weight.data.astype(np.float32),
                  model.enc_norm2.bias.data.astype(np.float32)),
        "norm3": (model.dec_norm1.weight.data.astype(np.float32),
                  model.dec_norm1.bias.data.astype(np.float32)),
        "norm4": (model.dec_norm2.weight.data.astype(np.float32),
                  model.dec_norm2.bias.data.astype(np.float32)),
    }
    return QuantizedModel(
        window=model.window, horizon=model.horizon, hidden_dim=model.hidden_dim,
        enc_width=model.enc_width, dec_width=model.dec_width, dec_mid=model.dec_mid,
        rank=model.rank, euler_steps=model.euler_steps, dt=float(model.dt),
        alpha=float(np.float32(model.alpha.data)), beta=float(np.float32(model.beta.data)),
        sparsity=float(sparsity), weights=weights, weight_q=weight_q,
        biases=biases, norms=norms,
        act=[range_to_qparams(lo, hi) for lo, hi in ranges])


def _dequant_dynamics(qm: QuantizedModel):
    wd = qm.weights["w_diag"].astype(np.float64) * qm.weight_q["w_diag"].scale
    U = qm.weights["u_lr"].astype(np.float64) * qm.weight_q["u_lr"].scale
    V = qm.weights["v_lr"].astype(np.float64) * qm.weight_q["v_lr"].scale
    return wd, U, V


def quantized_forward(qm: QuantizedModel, x, capture: list | None = None) -> np.ndarray:
    """Bit-deterministic int8 inference for one window; returns float32 forecast.

    `capture` collects the 10 int8 boundary tensors (golden vectors).
    """
    x = np.asarray(x, np.float32)
    if x.shape != (qm.window,):
        raise InputError(f"expected window of length {qm.window}, got {x.shape}")
    cap = capture.append if capture is not None else (lambda a: None)
    act = qm.act

    q0 = backend.quant_f64(x, act[0].scale, act[0].zero_point)
    cap(q0)
    x0 = backend.dequant_f64(q0, act[0].scale, act[0].zero_point)
    u_mean = backend.seq_sum(x0) / qm.window

    def qlin(qin, b_in, wname, bname, b_out):
        out = backend.qlinear(qin, act[b_in].zero_point, act[b_in].scale,
                              qm.weights[wname], qm.weight_q[wname].scale,
                              qm.biases[bname], act[b_out].scale, act[b_out].zero_point)
        cap(out)
        return out

    def floats(qv, b, norm):
        f = backend.dequant_f64(qv, act[b].scale, act[b].zero_point)
        gain, bias = qm.norms[norm]
        return backend.ln_f64(f, gain, bias, LN_EPS)

    q1 = qlin(q0, 0, "w_enc1", "b_enc1", 1)
    f = np.maximum(floats(q1, 1, "norm1"), 0.0)
    q2 = backend.quant_f64(f, act[2].scale, act[2].zero_point)
    cap(q2)
    q3 = qlin(q2, 2, "w_enc2", "b_enc2", 3)
    h = backend.ptanh(floats(q3, 3, "norm2"))

    wd, U, V = _dequant_dynamics(qm)
    h = backend.qeuler(h, wd, U, V, qm.rank, qm.alpha, qm.beta, qm.dt,
                       qm.euler_steps, u_mean)
    q4 = backend.quant_f64(h, act[4].scale, act[4].zero_point)
    cap(q4)

    q5 = qlin(q4, 4, "w_dec1", "b_dec1", 5)
    f = np.maximum(floats(q5, 5, "norm3"), 0.0)
    q6 = backend.quant_f64(f, act[6].scale, act[6].zero_point)
    cap(q6)
    q7 = qlin(q6, 6, "w_dec2", "b_dec2", 7)
    f = np.maximum(floats(q7, 7, "norm4"), 0.0)
    q8 = backend.quant_f64(f, act[8].scale, act[8].zero_point)
    cap(q8)
    q9 = qlin(q8, 8, "w_dec3", "b_dec3", 9)
    y = backend.dequant_f64(q9, act[9].scale, act[9].zero_point)
    return y.astype(np.float32)


def make_golden_vectors(qm: QuantizedModel, windows, count: int = 16,
                        seed: int = 0) -> GoldenVectors:
    """Seed-selected input windows with their int8 boundary tensors."""
    if len(windows) == 0:
        raise ConfigError("golden vector generation needs at least one window")
    rng = make_rng(seed, "golden")
    replace = len(windows) < count
    picks = rng.choice(len(windows), size=count, replace=replace)
    inputs, bounds, outputs = [], [], []
    for i in picks:
        x = np.asarray(windows[int(i)].x, np.float32)
        capture: list = []
        y = quantized_forward(qm, x, capture=capture)
        inputs.append(x)
        bounds.append(capture)
        outputs.append(y)
    return GoldenVectors(seed=seed, inputs=np.stack(inputs), boundaries=bounds,
                         outputs=np.stack(outputs))


# ---------------------------------------------------------------------------
# Payload encoding and size accounting
# ---------------------------------------------------------------------------

SPARSE_SPARSITY_MIN = 0.3


def sparse_encode(values: np.ndarray) -> bytes:
    """Zero-bitmap coding: MSB-first nonzero bitmap, then nonzero literals.

    Global magnitude pruning scatters zeros, so run-length schemes gain
    almost nothing; the bitmap costs a fixed n/8 bytes regardless of
    zero placement.
    """
    flat = values.ravel()
    nz = flat != 0
    bitmap = np.packbits(nz.astype(np.uint8)).tobytes()
    return bitmap + flat[nz].astype(np.int8).tobytes()


def sparse_decode(blob: bytes, size: int) -> np.ndarray:
    nbm = (size + 7) // 8
    bits = np.unpackbits(np.frombuffer(blob[:nbm], np.uint8), count=size).astype(bool)
    values = np.frombuffer(blob[nbm:], np.int8)
    if values.size != int(bits.sum()):
        raise EmissionError(f"sparse stream has {values.size} literals, "
                            f"bitmap expects {int(bits.sum())}")
    out = np.zeros(size, np.int8)
    out[bits] = values
    return out


def payload_entries(qm: QuantizedModel):
    """(name, encoded bytes, sparse flag, element count) per weight tensor.

    When the model's pruning sparsity is >= 0.3, each tensor uses the
    smaller of dense and zero-bitmap coding; below that, dense.
    """
    allow_sparse = qm.sparsity >= SPARSE_SPARSITY_MIN
    entries = []
    for name in WEIGHT_ORDER:
        w = qm.weights[name]
        dense = w.tobytes()
        if allow_sparse:
            sparse = sparse_encode(w)
            if len(sparse) < len(dense):
                entries.append((name, sparse, True, w.size))
                continue
        entries.append((name, dense, False, w.size))
    return entries


def quantized_payload_size(qm: QuantizedModel) -> int:
    """Exact byte length of the weight payload plus parameter tables."""
    total = sum(len(blob) for _, blob, _, _ in payload_entries(qm))
    total += 8 * len(WEIGHT_ORDER)                      # weight scales (f64)
    total += sum(b.size * 4 for b in qm.biases.values())  # float32 biases
    total += sum(g.size * 4 + b.size * 4 for g, b in qm.norms.values())
    total += N_BOUNDARIES * (8 + 4)                     # act scales + zero points
    total += 4 + 4 + 8                                   # alpha, beta (f32), dt (f64)
    total += 8 * 4                                       # dims/rank/steps table (int32)
    return total


# ---------------------------------------------------------------------------
# C source emission
# ---------------------------------------------------------------------------


def _chex(v: float) -> str:
    """C99 hex-double literal, bit-exact."""
    return float(v).hex()


def _cfloat(v: float) -> str:
    """Hex literal for a float32-representable value, with f suffix."""
    return float(np.float32(v)).hex() + "f"


def _int_list(arr, per_line=20) -> str:
    vals = [str(int(v)) for v in np.asarray(arr).ravel()]
    lines = []
    for i in range(0, len(vals), per_line):
        lines.append("    " + ", ".join(vals[i:i + per_line]))
    return ",\n".join(lines)


def _float_list(arr, per_line=8) -> str:
    vals = [_cfloat(v) for v in np.asarray(arr, np.float32).ravel()]
    lines = []
    for i in range(0, len(vals), per_line):
        lines.append("    " + ", ".join(vals[i:i + per_line]))
    return ",\n".join(lines)


def _emit_data_header(qm: QuantizedModel, entries) -> str:
    w = io.StringIO()
    w.write("/* Generated int8 model data. Do not edit. */\n")
    w.write("#ifndef SOH_MODEL_DATA_H\n#define SOH_MODEL_DATA_H\n\n#include <stdint.h>\n\n")
    dims = {
        "SOH_TAU": qm.window, "SOH_TAU_PRIME": qm.horizon, "SOH_HIDDEN": qm.hidden_dim,
        "SOH_ENC_WIDTH": qm.enc_width, "SOH_DEC_WIDTH": qm.dec_width,
        "SOH_DEC_MID": qm.dec_mid, "SOH_RANK": qm.rank, "SOH_EULER_STEPS": qm.euler_steps,
    }
    for k, v in dims.items():
        w.write(f"#define {k} {v}\n")
    w.write(f"#define SOH_NUM_BOUNDARIES {N_BOUNDARIES}\n")
    w.write(f"#define SOH_ALPHA {_chex(qm.alpha)}\n")
    w.write(f"#define SOH_BETA {_chex(qm.beta)}\n")
    w.write(f"#define SOH_EULER_DT {_chex(qm.dt)}\n")
    w.write(f"#define SOH_LN_EPS {_chex(LN_EPS)}\n")
    w.write(f"#define SOH_WEIGHT_PAYLOAD_BYTES {quantized_payload_size(qm)}\n\n")

    w.write("static const double soh_act_scale[SOH_NUM_BOUNDARIES] = {\n    "
            + ", ".join(_chex(q.scale) for q in qm.act) + "\n};\n")
    w.write("static const int32_t soh_act_zp[SOH_NUM_BOUNDARIES] = {\n    "
            + ", ".join(str(q.zero_point) for q in qm.act) + "\n};\n")
    w.write("static const char *const soh_boundary_name[SOH_NUM_BOUNDARIES] = {\n    "
            + ", ".join(f'"{n}"' for n in BOUNDARY_NAMES) + "\n};\n")
    w.write("static const char *const soh_boundary_tensor[SOH_NUM_BOUNDARIES] = {\n    "
            + ", ".join(f'"{n}"' for n in BOUNDARY_TENSOR) + "\n};\n\n")

    for (name, blob, sparse, size) in entries:
        up = name.upper()
        w.write(f"#define SOH_{up}_SP {1 if sparse else 0}\n")
        w.write(f"#define SOH_{up}_SIZE {size}\n")
        w.write(f"#define SOH_{up}_BYTES {len(blob)}\n")
        w.write(f"static const double soh_ws_{name} = {_chex(qm.weight_q[name].scale)};\n")
        if sparse:
            w.write(f"static const uint8_t soh_t_{name}_enc[{max(len(blob), 1)}] = {{\n")
            w.write(_int_list(np.frombuffer(blob, np.uint8)))
            w.write("\n};\n\n")
        else:
            w.write(f"static const int8_t soh_t_{name}[{max(size, 1)}] = {{\n")
            w.write(_int_list(np.frombuffer(blob, np.int8)))
            w.write("\n};\n\n")

    for name, arr in qm.biases.items():
        w.write(f"static const float soh_{name}[{arr.size}] = {{\n{_float_list(arr)}\n}};\n")
    for name, (gain, bias) in qm.norms.items():
        w.write(f"static const float soh_{name}_gain[{gain.size}] = {{\n{_float_list(gain)}\n}};\n")
        w.write(f"static const float soh_{name}_bias[{bias.size}] = {{\n{_float_list(bias)}\n}};\n")
    w.write("\n#endif /* SOH_MODEL_DATA_H */\n")
    return w.getvalue()


def _kernel_source() -> str:
    from .backend import fallback

    coef = ",\n    ".join(float(c).hex() for c in fallback._EXP_COEF)
    return KERNEL_TEMPLATE.replace("@EXP_COEF@", coef)


def emit_embedded_source(qm: QuantizedModel, gv: GoldenVectors) -> dict[str, str]:
    """Deterministic text bundle: data header, kernel source, golden.csv."""
    widths = qm.widths()
    for name in WEIGHT_ORDER:
        if name not in qm.weights:
            raise EmissionError(f"missing weight tensor: {name}")
        if qm.weights[name].shape != widths[name]:
            raise EmissionError(f"unsupported layer shape for {name}: {qm.weights[name].shape}")
    extra = set(qm.weights) - set(WEIGHT_ORDER)
    if extra:
        raise EmissionError(f"unsupported tensors in graph: {sorted(extra)}")
    entries = payload_entries(qm)
    golden = io.StringIO()
    golden.write("vector_id,kind,index,value\n")
    for vid in range(gv.inputs.shape[0]):
        for i, v in enumerate(gv.inputs[vid]):
            golden.write(f"{vid},input,{i},{float(v):.9g}\n")
        for b, qarr in enumerate(gv.boundaries[vid]):
            for i, q in enumerate(qarr):
                golden.write(f"{vid},intermediate:{b},{i},{int(q)}\n")
        for i, v in enumerate(gv.outputs[vid]):
            golden.write(f"{vid},output,{i},{float(v):.9g}\n")
    return {
        "soh_model_data.h": _emit_data_header(qm, entries),
        "soh_model_kernel.c": _kernel_source(),
        "golden.csv": golden.getvalue(),
    }


KERNEL_TEMPLATE = r"""/* Generated int8 inference kernel. Self-contained; no heap use. */
#include <stdint.h>
#include <math.h> /* floor, sqrt, fabs, copysign, ldexp: exactly-rounded IEEE ops */

#include "soh_model_data.h"

/* ---- fixed tensor arena -------------------------------------------------- */

#define SOH_MAXW_ (SOH_TAU > SOH_TAU_PRIME ? SOH_TAU : SOH_TAU_PRIME)
#define SOH_MAXW__ (SOH_MAXW_ > SOH_ENC_WIDTH ? SOH_MAXW_ : SOH_ENC_WIDTH)
#define SOH_MAXW___ (SOH_MAXW__ > SOH_DEC_WIDTH ? SOH_MAXW__ : SOH_DEC_WIDTH)
#define SOH_MAXW (SOH_MAXW___ > SOH_HIDDEN ? SOH_MAXW___ : SOH_HIDDEN)

#define SOH_ALIGN8(n) (((n) + 7u) & ~7u)

#define SOH_OFF_DYN_WD 0u
#define SOH_OFF_DYN_U (SOH_OFF_DYN_WD + 8u * SOH_HIDDEN)
#define SOH_OFF_DYN_V (SOH_OFF_DYN_U + 8u * SOH_HIDDEN * SOH_RANK)
#define SOH_OFF_F (SOH_OFF_DYN_V + 8u * SOH_HIDDEN * SOH_RANK)
#define SOH_OFF_H (SOH_OFF_F + 8u * SOH_MAXW)
#define SOH_OFF_S (SOH_OFF_H + 8u * SOH_HIDDEN)
#define SOH_OFF_Y (SOH_OFF_S + 8u * SOH_RANK)
#define SOH_OFF_QA (SOH_OFF_Y + 8u * SOH_HIDDEN)
#define SOH_OFF_QB (SOH_OFF_QA + SOH_ALIGN8(SOH_MAXW))
#define SOH_OFF_DEC (SOH_OFF_QB + SOH_ALIGN8(SOH_MAXW))

#if SOH_W_ENC1_SP || SOH_W_ENC2_SP || SOH_W_DEC1_SP || SOH_W_DEC2_SP || SOH_W_DEC3_SP \
    || SOH_W_DIAG_SP || SOH_U_LR_SP || SOH_V_LR_SP
#define SOH_ANY_SP 1
#define SOH_DEC_BYTES (SOH_W_ENC1_SIZE + SOH_W_ENC2_SIZE + SOH_W_DEC1_SIZE \
    + SOH_W_DEC2_SIZE + SOH_W_DEC3_SIZE + SOH_W_DIAG_SIZE + SOH_U_LR_SIZE + SOH_V_LR_SIZE)
#else
#define SOH_ANY_SP 0
#define SOH_DEC_BYTES 0
#endif

#define SOH_ARENA_BYTES (SOH_OFF_DEC + SOH_ALIGN8(SOH_DEC_BYTES))

static union {
    double align_;
    uint8_t bytes[SOH_ARENA_BYTES];
} soh_arena;

unsigned long soh_arena_bytes(void) { return (unsigned long)SOH_ARENA_BYTES; }
unsigned long soh_payload_bytes(void) { return (unsigned long)SOH_WEIGHT_PAYLOAD_BYTES; }
int soh_tau(void) { return SOH_TAU; }
int soh_tau_prime(void) { return SOH_TAU_PRIME; }
int soh_n_boundaries(void) { return SOH_NUM_BOUNDARIES; }
const char *soh_boundary_name_at(int b) { return soh_boundary_name[b]; }
const char *soh_boundary_tensor_at(int b) { return soh_boundary_tensor[b]; }

/* ---- portable transcendentals (bit-exact IEEE op sequences) -------------- */

static const double soh_exp_coef[14] = {
    @EXP_COEF@
};

static double soh_round_away(double v) {
    return copysign(floor(fabs(v) + 0.5), v);
}

static double soh_exp_pos(double x) { /* x >= 0 */
    double k = floor(x * 0x1.71547652b82fep+0 + 0.5);
    double r = (x - k * 0x1.62e42fee00000p-1) - k * 0x1.a39ef35793c76p-33;
    double p = soh_exp_coef[13];
    int i;
    for (i = 12; i >= 0; i--) {
        p = p * r + soh_exp_coef[i];
    }
    return ldexp(p, (int)k);
}

static double soh_tanh(double x) {
    double a = fabs(x);
    double t;
    if (a <= 20.0) {
        double e = soh_exp_pos(2.0 * a);
        t = 1.0 - 2.0 / (e + 1.0);
    } else {
        t = 1.0;
    }
    return copysign(t, x);
}

/* ---- quantized primitives ------------------------------------------------ */

static void soh_quant(const double *x, int n, int b, int8_t *out) {
    double s = soh_act_scale[b];
    int32_t zp = soh_act_zp[b];
    int i;
    for (i = 0; i < n; i++) {
        double q = (double)zp + soh_round_away(x[i] / s);
        if (q < -128.0) q = -128.0;
        if (q > 127.0) q = 127.0;
        out[i] = (int8_t)q;
    }
}

static void soh_dequant(const int8_t *q, int n, int b, double *out) {
    double s = soh_act_scale[b];
    double zp = (double)soh_act_zp[b];
    int i;
    for (i = 0; i < n; i++) {
        out[i] = ((double)q[i] - zp) * s;
    }
}

static void soh_qlinear(const int8_t *xq, int n_in, const int8_t *w, double ws,
                        const float *bias, int n_out, int b_in, int b_out, int8_t *out) {
    double s_in = soh_act_scale[b_in];
    double s_out = soh_act_scale[b_out];
    int32_t zp_in = soh_act_zp[b_in];
    int32_t zp_out = soh_act_zp[b_out];
    double combined = s_in * ws;
    int j, k;
    for (j = 0; j < n_out; j++) {
        int32_t acc = 0;
        const int8_t *row = w + (long)j * n_in;
        for (k = 0; k < n_in; k++) {
            acc += ((int32_t)xq[k] - zp_in) * (int32_t)row[k];
        }
        {
            double v = (double)acc * combined + (double)bias[j];
            double q = (double)zp_out + soh_round_away(v / s_out);
            if (q < -128.0) q = -128.0;
            if (q > 127.0) q = 127.0;
            out[j] = (int8_t)q;
        }
    }
}

static void soh_layernorm(double *x, int n, const float *gain, const float *bias) {
    double sum = 0.0, var = 0.0, mean, inv;
    int i;
    for (i = 0; i < n; i++) sum += x[i];
    mean = sum / (double)n;
    for (i = 0; i < n; i++) {
        double dev = x[i] - mean;
        var += dev * dev;
    }
    var = var / (double)n;
    inv = 1.0 / sqrt(var + SOH_LN_EPS);
    for (i = 0; i < n; i++) {
        x[i] = ((x[i] - mean) * inv) * (double)gain[i] + (double)bias[i];
    }
}

static void soh_relu(double *x, int n) {
    int i;
    for (i = 0; i < n; i++) {
        if (x[i] < 0.0) x[i] = 0.0;
    }
}

static void soh_rollout(double *h, double u_mean) {
    const double *wd = (const double *)(soh_arena.bytes + SOH_OFF_DYN_WD);
    const double *U = (const double *)(soh_arena.bytes + SOH_OFF_DYN_U);
    const double *V = (const double *)(soh_arena.bytes + SOH_OFF_DYN_V);
    double *s = (double *)(soh_arena.bytes + SOH_OFF_S);
    double *y = (double *)(soh_arena.bytes + SOH_OFF_Y);
    double inv_r = 1.0 / (double)SOH_RANK;
    int step, i, j, m;
    for (step = 0; step < SOH_EULER_STEPS; step++) {
        for (m = 0; m < SOH_RANK; m++) {
            double acc = 0.0;
            for (i = 0; i < SOH_HIDDEN; i++) {
                acc += V[(long)i * SOH_RANK + m] * h[i];
            }
            s[m] = acc;
        }
        for (j = 0; j < SOH_HIDDEN; j++) {
            double acc = 0.0;
            for (m = 0; m < SOH_RANK; m++) {
                acc += U[(long)j * SOH_RANK + m] * s[m];
            }
            y[j] = acc;
        }
        for (j = 0; j < SOH_HIDDEN; j++) {
            double z = h[j] * wd[j] + y[j] * inv_r;
            double t;
            z = z + u_mean;
            t = soh_tanh(z);
            h[j] = h[j] + SOH_EULER_DT * (-(SOH_ALPHA * h[j]) + SOH_BETA * t);
        }
    }
}

/* ---- init: sparse decode + dynamics dequantization -------------------------- */

static int soh_ready = 0;
static const int8_t *soh_p_enc1, *soh_p_enc2, *soh_p_dec1, *soh_p_dec2, *soh_p_dec3;
static const int8_t *soh_p_diag, *soh_p_u, *soh_p_v;

#if SOH_ANY_SP
/* zero-bitmap coding: MSB-first nonzero bitmap (size/8 bytes), then literals */
static void soh_sparse_expand(const uint8_t *enc, int8_t *dst, long size) {
    long nbm = (size + 7) / 8;
    const uint8_t *lit = enc + nbm;
    long i;
    for (i = 0; i < size; i++) {
        if ((enc[i >> 3] >> (7 - (i & 7))) & 1u) {
            dst[i] = (int8_t)*lit++;
        } else {
            dst[i] = 0;
        }
    }
}
#endif

void soh_model_init(void) {
#if SOH_ANY_SP
    int8_t *dec = (int8_t *)(soh_arena.bytes + SOH_OFF_DEC);
    long off = 0;
#endif
    double *wd = (double *)(soh_arena.bytes + SOH_OFF_DYN_WD);
    double *U = (double *)(soh_arena.bytes + SOH_OFF_DYN_U);
    double *V = (double *)(soh_arena.bytes + SOH_OFF_DYN_V);
    int i;
    if (soh_ready) return;
#if SOH_W_ENC1_SP
    soh_sparse_expand(soh_t_w_enc1_enc, dec + off, SOH_W_ENC1_SIZE);
    soh_p_enc1 = dec + off; off += SOH_W_ENC1_SIZE;
#else
    soh_p_enc1 = soh_t_w_enc1;
#endif
#if SOH_W_ENC2_SP
    soh_sparse_expand(soh_t_w_enc2_enc, dec + off, SOH_W_ENC2_SIZE);
    soh_p_enc2 = dec + off; off += SOH_W_ENC2_SIZE;
#else
    soh_p_enc2 = soh_t_w_enc2;
#endif
#if SOH_W_DEC1_SP
    soh_sparse_expand(soh_t_w_dec1_enc, dec + off, SOH_W_DEC1_SIZE);
    soh_p_dec1 = dec + off; off += SOH_W_DEC1_SIZE;
#else
    soh_p_dec1 = soh_t_w_dec1;
#endif
#if SOH_W_DEC2_SP
    soh_sparse_expand(soh_t_w_dec2_enc, dec + off, SOH_W_DEC2_SIZE);
    soh_p_dec2 = dec + off; off += SOH_W_DEC2_SIZE;
#else
    soh_p_dec2 = soh_t_w_dec2;
#endif
#if SOH_W_DEC3_SP
    soh_sparse_expand(soh_t_w_dec3_enc, dec + off, SOH_W_DEC3_SIZE);
    soh_p_dec3 = dec + off; off += SOH_W_DEC3_SIZE;
#else
    soh_p_dec3 = soh_t_w_dec3;
#endif
#if SOH_W_DIAG_SP
    soh_sparse_expand(soh_t_w_diag_enc, dec + off, SOH_W_DIAG_SIZE);
    soh_p_diag = dec + off; off += SOH_W_DIAG_SIZE;
#else
    soh_p_diag = soh_t_w_diag;
#endif
#if SOH_U_LR_SP
    soh_sparse_expand(soh_t_u_lr_enc, dec + off, SOH_U_LR_SIZE);
    soh_p_u = dec + off; off += SOH_U_LR_SIZE;
#else
    soh_p_u = soh_t_u_lr;
#endif
#if SOH_V_LR_SP
    soh_sparse_expand(soh_t_v_lr_enc, dec + off, SOH_V_LR_SIZE);
    soh_p_v = dec + off; off += SOH_V_LR_SIZE;
#else
    soh_p_v = soh_t_v_lr;
#endif
    for (i = 0; i < SOH_HIDDEN; i++) wd[i] = (double)soh_p_diag[i] * soh_ws_w_diag;
    for (i = 0; i < SOH_HIDDEN * SOH_RANK; i++) U[i] = (double)soh_p_u[i] * soh_ws_u_lr;
    for (i = 0; i < SOH_HIDDEN * SOH_RANK; i++) V[i] = (double)soh_p_v[i] * soh_ws_v_lr;
    soh_ready = 1;
}

/* ---- inference ------------------------------------------------------------ */

typedef void (*soh_tap_fn)(int boundary, const int8_t *values, int n, void *ctx);

void soh_model_infer(const float *x, float *y, soh_tap_fn tap, void *ctx) {
    double *f = (double *)(soh_arena.bytes + SOH_OFF_F);
    double *h = (double *)(soh_arena.bytes + SOH_OFF_H);
    int8_t *qa = (int8_t *)(soh_arena.bytes + SOH_OFF_QA);
    int8_t *qb = (int8_t *)(soh_arena.bytes + SOH_OFF_QB);
    double u_mean;
    int i;
#define SOH_TAP(B, PTR, N) do { if (tap) tap((B), (PTR), (N), ctx); } while (0)
    for (i = 0; i < SOH_TAU; i++) f[i] = (double)x[i];
    soh_quant(f, SOH_TAU, 0, qa);
    SOH_TAP(0, qa, SOH_TAU);
    soh_dequant(qa, SOH_TAU, 0, f);
    {
        double sum = 0.0;
        for (i = 0; i < SOH_TAU; i++) sum += f[i];
        u_mean = sum / (double)SOH_TAU;
    }
    soh_qlinear(qa, SOH_TAU, soh_p_enc1, soh_ws_w_enc1, soh_b_enc1, SOH_ENC_WIDTH, 0, 1, qb);
    SOH_TAP(1, qb, SOH_ENC_WIDTH);
    soh_dequant(qb, SOH_ENC_WIDTH, 1, f);
    soh_layernorm(f, SOH_ENC_WIDTH, soh_norm1_gain, soh_norm1_bias);
    soh_relu(f, SOH_ENC_WIDTH);
    soh_quant(f, SOH_ENC_WIDTH, 2, qa);
    SOH_TAP(2, qa, SOH_ENC_WIDTH);
    soh_qlinear(qa, SOH_ENC_WIDTH, soh_p_enc2, soh_ws_w_enc2, soh_b_enc2, SOH_HIDDEN, 2, 3, qb);
    SOH_TAP(3, qb, SOH_HIDDEN);
    soh_dequant(qb, SOH_HIDDEN, 3, f);
    soh_layernorm(f, SOH_HIDDEN, soh_norm2_gain, soh_norm2_bias);
    for (i = 0; i < SOH_HIDDEN; i++) h[i] = soh_tanh(f[i]);
    soh_rollout(h, u_mean);
    soh_quant(h, SOH_HIDDEN, 4, qa);
    SOH_TAP(4, qa, SOH_HIDDEN);
    soh_qlinear(qa, SOH_HIDDEN, soh_p_dec1, soh_ws_w_dec1, soh_b_dec1, SOH_DEC_WIDTH, 4, 5, qb);
    SOH_TAP(5, qb, SOH_DEC_WIDTH);
    soh_dequant(qb, SOH_DEC_WIDTH, 5, f);
    soh_layernorm(f, SOH_DEC_WIDTH, soh_norm3_gain, soh_norm3_bias);
    soh_relu(f, SOH_DEC_WIDTH);
    soh_quant(f, SOH_DEC_WIDTH, 6, qa);
    SOH_TAP(6, qa, SOH_DEC_WIDTH);
    soh_qlinear(qa, SOH_DEC_WIDTH, soh_p_dec2, soh_ws_w_dec2, soh_b_dec2, SOH_DEC_MID, 6, 7, qb);
    SOH_TAP(7, qb, SOH_DEC_MID);
    soh_dequant(qb, SOH_DEC_MID, 7, f);
    soh_layernorm(f, SOH_DEC_MID, soh_norm4_gain, soh_norm4_bias);
    soh_relu(f, SOH_DEC_MID);
    soh_quant(f, SOH_DEC_MID, 8, qa);
    SOH_TAP(8, qa, SOH_DEC_MID);
    soh_qlinear(qa, SOH_DEC_MID, soh_p_dec3, soh_ws_w_dec3, soh_b_dec3, SOH_TAU_PRIME, 8, 9, qb);
    SOH_TAP(9, qb, SOH_TAU_PRIME);
    for (i = 0; i < SOH_TAU_PRIME; i++) {
        y[i] = (float)(((double)qb[i] - (double)soh_act_zp[9]) * soh_act_scale[9]);
    }
#undef SOH_TAP
}
"""
