"""Pure-numpy implementations of the hot kernels.

Two families live here:

* Float training kernels: fused forward/backward for the fixed-step
  RK4 teacher integration and the explicit-Euler student rollout.
  These are dtype-generic (float32 in production, float64 in oracle
  tests) and batched over rows.

* Quantized inference kernels: double-precision reference semantics
  for the int8 graph. Reductions use `np.add.accumulate` (documented
  sequential order) and transcendentals use the portable exp/tanh
  below, so results are bit-identical to a plain C loop over doubles.
  The emitted embedded kernel implements exactly these formulas.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "fallback"

# ---------------------------------------------------------------------------
# Float dynamics kernels
# ---------------------------------------------------------------------------


def lowrank_apply(w_diag, U, V, rank, h):
    """diag(w_diag) @ h + U @ (V.T @ h) / rank, batched over rows of h."""
    s = h @ V
    return h * w_diag + (s @ U.T) / np.asarray(rank, h.dtype)


def euler_fwd(h0, w_diag, U, V, rank, alpha, beta, dt, steps, u, need_saved):
    """Explicit Euler: h += dt * (-alpha*h + beta*tanh(W'h + u)), W' low-rank.

    Returns (h_final, saved) where saved = (h_hist, t_hist) with shapes
    (steps, B, d); saved is None when need_saved is false.
    """
    dtype = h0.dtype
    dt_c = np.asarray(dt, dtype)
    a_c = np.asarray(alpha, dtype)
    b_c = np.asarray(beta, dtype)
    h = h0
    h_hist = np.empty((steps,) + h0.shape, dtype) if need_saved else None
    t_hist = np.empty((steps,) + h0.shape, dtype) if need_saved else None
    for k in range(steps):
        z = lowrank_apply(w_diag, U, V, rank, h) + u
        t = np.tanh(z)
        if need_saved:
            h_hist[k] = h
            t_hist[k] = t
        h = h + dt_c * (-(a_c * h) + b_c * t)
    return h, ((h_hist, t_hist) if need_saved else None)


def euler_bwd(saved, w_diag, U, V, rank, alpha, beta, dt, steps, g_out):
    """Adjoint of euler_fwd. Returns (g_h0, g_alpha, g_beta, g_wdiag, g_U, g_V, g_u)."""
    h_hist, t_hist = saved
    dtype = g_out.dtype
    inv_r = np.asarray(1.0 / rank, dtype)
    dt_c = np.asarray(dt, dtype)
    a_c = np.asarray(alpha, dtype)
    b_c = np.asarray(beta, dtype)
    g = g_out.copy()
    g_a = np.zeros((), dtype)
    g_b = np.zeros((), dtype)
    g_wd = np.zeros_like(w_diag)
    g_U = np.zeros_like(U)
    g_V = np.zeros_like(V)
    g_u = np.zeros_like(g_out)
    for k in range(steps - 1, -1, -1):
        h = h_hist[k]
        t = t_hist[k]
        g_a -= dt_c * np.sum(g * h, dtype=dtype)
        g_b += dt_c * np.sum(g * t, dtype=dtype)
        gz = (g * (dt_c * b_c)) * (1.0 - t * t)
        g_wd += np.sum(gz * h, axis=0)
        g_u += gz
        s = (h @ V) * inv_r
        g_U += gz.T @ s
        gs = gz @ U
        g_V += (h.T @ gs) * inv_r
        g = g * (1.0 - dt_c * a_c) + gz * w_diag + (gs @ V.T) * inv_r
    return g, g_a, g_b, g_wd, g_U, g_V, g_u


def _deriv(W, alpha, beta, y, t):
    return -(alpha * y) + beta * t


def rk4_fwd(h0, W, alpha, beta, dt, steps, u, need_saved):
    """Classical fixed-step RK4 for dh/dt = -alpha*h + beta*tanh(W h + u).

    saved = (h_hist (steps,B,d), t_hist (steps,4,B,d)).
    """
    dtype = h0.dtype
    dt_c = np.asarray(dt, dtype)
    half = np.asarray(0.5 * dt, dtype)
    sixth = np.asarray(dt / 6.0, dtype)
    a_c = np.asarray(alpha, dtype)
    b_c = np.asarray(beta, dtype)
    h = h0
    h_hist = np.empty((steps,) + h0.shape, dtype) if need_saved else None
    t_hist = np.empty((steps, 4) + h0.shape, dtype) if need_saved else None
    Wt = W.T
    for k in range(steps):
        t1 = np.tanh(h @ Wt + u)
        k1 = _deriv(W, a_c, b_c, h, t1)
        y2 = h + half * k1
        t2 = np.tanh(y2 @ Wt + u)
        k2 = _deriv(W, a_c, b_c, y2, t2)
        y3 = h + half * k2
        t3 = np.tanh(y3 @ Wt + u)
        k3 = _deriv(W, a_c, b_c, y3, t3)
        y4 = h + dt_c * k3
        t4 = np.tanh(y4 @ Wt + u)
        k4 = _deriv(W, a_c, b_c, y4, t4)
        if need_saved:
            h_hist[k] = h
            t_hist[k, 0] = t1
            t_hist[k, 1] = t2
            t_hist[k, 2] = t3
            t_hist[k, 3] = t4
        h = h + sixth * (k1 + 2.0 * (k2 + k3) + k4)
    return h, ((h_hist, t_hist) if need_saved else None)


def rk4_bwd(saved, W, alpha, beta, dt, steps, g_out):
    """Adjoint of rk4_fwd. Returns (g_h0, g_alpha, g_beta, g_W, g_u)."""
    h_hist, t_hist = saved
    dtype = g_out.dtype
    dt_c = np.asarray(dt, dtype)
    half = np.asarray(0.5 * dt, dtype)
    sixth = np.asarray(dt / 6.0, dtype)
    third = np.asarray(dt / 3.0, dtype)
    a_c = np.asarray(alpha, dtype)
    b_c = np.asarray(beta, dtype)
    g = g_out.copy()
    g_a = np.zeros((), dtype)
    g_b = np.zeros((), dtype)
    g_W = np.zeros_like(W)
    g_u = np.zeros_like(g_out)

    for k in range(steps - 1, -1, -1):
        h = h_hist[k]
        t1, t2, t3, t4 = t_hist[k]
        # Recompute stage inputs from the saved tanh values.
        k1 = _deriv(W, a_c, b_c, h, t1)
        y2 = h + half * k1
        k2 = _deriv(W, a_c, b_c, y2, t2)
        y3 = h + half * k2
        k3 = _deriv(W, a_c, b_c, y3, t3)
        y4 = h + dt_c * k3

        gh = g.copy()
        gk1 = sixth * g
        gk2 = third * g
        gk3 = third * g
        gk4 = sixth * g

        def stage_vjp(y, t, gk):
            nonlocal g_a, g_b, g_W, g_u
            g_a -= np.sum(y * gk, dtype=dtype)
            g_b += np.sum(t * gk, dtype=dtype)
            gz = (gk * b_c) * (1.0 - t * t)
            g_W += gz.T @ y
            g_u += gz
            return -(a_c * gk) + gz @ W

        gy4 = stage_vjp(y4, t4, gk4)
        gh += gy4
        gk3 = gk3 + dt_c * gy4
        gy3 = stage_vjp(y3, t3, gk3)
        gh += gy3
        gk2 = gk2 + half * gy3
        gy2 = stage_vjp(y2, t2, gk2)
        gh += gy2
        gk1 = gk1 + half * gy2
        gy1 = stage_vjp(h, t1, gk1)
        gh += gy1
        g = gh
    return g, g_a, g_b, g_W, g_u


# ---------------------------------------------------------------------------
# Quantized inference kernels (double precision, defined op order)
# ---------------------------------------------------------------------------

_LN2_HI = 6.93147180369123816490e-01
_LN2_LO = 1.90821492927058770002e-10
_INV_LN2 = 1.4426950408889634074
# 1/k! for the fixed-order Taylor evaluation of exp on [-ln2/2, ln2/2].
_EXP_COEF = [1.0 / math.factorial(k) for k in range(14)]


def round_away(v):
    """Round half away from zero (the single rounding rule of the int8 path)."""
    return np.copysign(np.floor(np.fabs(v) + 0.5), v)


def pexp(x):
    """Portable exp for x >= 0 built from exactly-rounded IEEE ops only.

    Range reduction x = k*ln2 + r, degree-13 Taylor in fixed Horner
    order, then an exact ldexp. Matches the emitted C helper bit for bit.
    """
    x = np.asarray(x, np.float64)
    k = np.floor(x * _INV_LN2 + 0.5)
    r = (x - k * _LN2_HI) - k * _LN2_LO
    p = np.full_like(r, _EXP_COEF[13])
    for i in range(12, -1, -1):
        p = p * r + _EXP_COEF[i]
    return np.ldexp(p, k.astype(np.int32))


def ptanh(x):
    """Portable tanh: sign(x) * (1 - 2/(exp(2|x|) + 1)), |x|>20 saturates."""
    x = np.asarray(x, np.float64)
    a = np.fabs(x)
    small = a <= 20.0
    e = pexp(np.where(small, 2.0 * a, 0.0))
    t = np.where(small, 1.0 - 2.0 / (e + 1.0), 1.0)
    return np.copysign(t, x)


def seq_sum(x):
    """Strictly left-to-right float64 summation (matches a C loop)."""
    x = np.asarray(x, np.float64)
    if x.size == 0:
        return 0.0
    return float(np.add.accumulate(x)[-1])


def ln_f64(x, gain, bias, eps):
    """LayerNorm over a 1-D double vector with sequential statistics."""
    n = x.shape[0]
    mean = seq_sum(x) / n
    dev = x - mean
    var = seq_sum(dev * dev) / n
    inv = 1.0 / math.sqrt(var + eps)
    return dev * inv * np.asarray(gain, np.float64) + np.asarray(bias, np.float64)


def qlinear(xq, zp_in, s_in, wq, s_w, bias, s_out, zp_out):
    """int8 linear layer: int32 accumulation, float bias, requantize.

    xq: int8 (n_in,); wq: int8 (n_out, n_in); bias float32 (n_out,).
    Returns the requantized int8 output (n_out,).
    """
    acc = wq.astype(np.int32) @ (xq.astype(np.int32) - np.int32(zp_in))
    v = acc.astype(np.float64) * (s_in * s_w) + bias.astype(np.float64)
    q = np.int32(zp_out) + round_away(v / s_out)
    return np.clip(q, -128, 127).astype(np.int8)


def quant_f64(x, scale, zp):
    q = np.int32(zp) + round_away(np.asarray(x, np.float64) / scale)
    return np.clip(q, -128, 127).astype(np.int8)


def dequant_f64(q, scale, zp):
    return (q.astype(np.float64) - np.float64(zp)) * scale


def qeuler(h, w_diag, U, V, rank, alpha, beta, dt, steps, u_mean):
    """Double-precision Euler rollout on dequantized dynamics tensors.

    Contraction order is fixed (ascending index) so a C loop reproduces
    it exactly: s[m] = sum_i V[i,m]*h[i]; y[j] = sum_m U[j,m]*s[m].
    """
    h = np.asarray(h, np.float64).copy()
    inv_r = 1.0 / rank
    for _ in range(steps):
        s = np.add.accumulate(V * h[:, None], axis=0)[-1]
        y = np.add.accumulate(U * s[None, :], axis=1)[:, -1]
        z = h * w_diag + y * inv_r
        z = z + u_mean
        t = ptanh(z)
        h = h + dt * (-(alpha * h) + beta * t)
    return h
