# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: dynamics rollouts (fwd/bwd) and int8 inference.

Contracts match sohcast.backend.fallback. Float kernels are fused over
float32/float64 and may differ from the numpy fallback in the last ulp
(accumulation order); the quantized kernels reproduce the fallback bit
for bit (same double op sequences, same portable exp/tanh).
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport copysign, fabs, floor, ldexp, sqrt, tanh

cnp.import_array()

ctypedef fused real:
    float
    double

NAME = "compiled"

cdef double _EXPC[14]


def _init_coefficients(coef):
    cdef int i
    for i in range(14):
        _EXPC[i] = coef[i]


from . import fallback as _fb  # noqa: E402  (single source for the exp table)

_init_coefficients(_fb._EXP_COEF)

lowrank_apply = _fb.lowrank_apply
round_away = _fb.round_away
quant_f64 = _fb.quant_f64
dequant_f64 = _fb.dequant_f64
seq_sum = _fb.seq_sum
pexp = _fb.pexp


# ---------------------------------------------------------------------------
# Euler rollout
# ---------------------------------------------------------------------------


def _euler_fwd_loop(real[:, ::1] h, real[::1] wd, real[:, ::1] U, real[:, ::1] V,
                    double rank, double alpha_, double beta_, double dt_,
                    real[:, ::1] u, real[:, :, ::1] h_hist, real[:, :, ::1] t_hist,
                    real[::1] s, int steps, bint save):
    cdef real inv_r = <real>(1.0 / rank)
    cdef real alpha = <real>alpha_, beta = <real>beta_, dt = <real>dt_
    cdef Py_ssize_t B = h.shape[0], d = h.shape[1], r = s.shape[0]
    cdef Py_ssize_t k, b, i, j, m
    cdef real acc, z, t
    with nogil:
        for k in range(steps):
            for b in range(B):
                for m in range(r):
                    acc = 0
                    for i in range(d):
                        acc = acc + V[i, m] * h[b, i]
                    s[m] = acc
                for j in range(d):
                    acc = 0
                    for m in range(r):
                        acc = acc + U[j, m] * s[m]
                    z = h[b, j] * wd[j] + acc * inv_r + u[b, j]
                    t = <real>tanh(z)
                    if save:
                        h_hist[k, b, j] = h[b, j]
                        t_hist[k, b, j] = t
                    h[b, j] = h[b, j] + dt * (-(alpha * h[b, j]) + beta * t)


def euler_fwd(h0, w_diag, U, V, rank, alpha, beta, dt, steps, u, need_saved):
    dtype = h0.dtype
    h = np.ascontiguousarray(h0).copy()
    steps = int(steps)
    shape = (steps,) + h.shape if need_saved else (1, 1, 1)
    h_hist = np.empty(shape, dtype)
    t_hist = np.empty(shape, dtype)
    s = np.empty(int(rank), dtype)
    _euler_fwd_loop(h, np.ascontiguousarray(w_diag), np.ascontiguousarray(U),
                    np.ascontiguousarray(V), float(rank), float(alpha), float(beta),
                    float(dt), np.ascontiguousarray(u), h_hist, t_hist, s, steps,
                    bool(need_saved))
    return h, ((h_hist, t_hist) if need_saved else None)


def _euler_bwd_loop(real[:, ::1] g, real[:, :, ::1] h_hist, real[:, :, ::1] t_hist,
                    real[::1] wd, real[:, ::1] U, real[:, ::1] V, double rank,
                    double alpha_, double beta_, double dt_, real[::1] gab,
                    real[::1] gwd, real[:, ::1] gU, real[:, ::1] gV, real[:, ::1] gu,
                    real[::1] gz, real[::1] s, real[::1] gs, int steps):
    cdef real inv_r = <real>(1.0 / rank)
    cdef real alpha = <real>alpha_, beta = <real>beta_, dt = <real>dt_
    cdef Py_ssize_t B = g.shape[0], d = g.shape[1], r = s.shape[0]
    cdef Py_ssize_t k, b, i, j, m
    cdef real acc
    with nogil:
        for k in range(steps - 1, -1, -1):
            for b in range(B):
                for j in range(d):
                    gab[0] = gab[0] - dt * (g[b, j] * h_hist[k, b, j])
                    gab[1] = gab[1] + dt * (g[b, j] * t_hist[k, b, j])
                    gz[j] = (g[b, j] * (dt * beta)) * (1 - t_hist[k, b, j] * t_hist[k, b, j])
                    gwd[j] = gwd[j] + gz[j] * h_hist[k, b, j]
                    gu[b, j] = gu[b, j] + gz[j]
                for m in range(r):
                    acc = 0
                    for i in range(d):
                        acc = acc + V[i, m] * h_hist[k, b, i]
                    s[m] = acc * inv_r
                for j in range(d):
                    for m in range(r):
                        gU[j, m] = gU[j, m] + gz[j] * s[m]
                for m in range(r):
                    acc = 0
                    for j in range(d):
                        acc = acc + gz[j] * U[j, m]
                    gs[m] = acc
                for i in range(d):
                    for m in range(r):
                        gV[i, m] = gV[i, m] + (h_hist[k, b, i] * gs[m]) * inv_r
                for i in range(d):
                    acc = 0
                    for m in range(r):
                        acc = acc + gs[m] * V[i, m]
                    g[b, i] = g[b, i] * (1 - dt * alpha) + gz[i] * wd[i] + acc * inv_r


def euler_bwd(saved, w_diag, U, V, rank, alpha, beta, dt, steps, g_out):
    h_hist, t_hist = saved
    dtype = g_out.dtype
    g = np.ascontiguousarray(g_out).copy()
    Uc = np.ascontiguousarray(U)
    Vc = np.ascontiguousarray(V)
    d, r = Uc.shape
    gab = np.zeros(2, dtype)
    gwd = np.zeros(d, dtype)
    gU = np.zeros_like(Uc)
    gV = np.zeros_like(Vc)
    gu = np.zeros_like(g)
    _euler_bwd_loop(g, np.ascontiguousarray(h_hist), np.ascontiguousarray(t_hist),
                    np.ascontiguousarray(w_diag), Uc, Vc, float(rank), float(alpha),
                    float(beta), float(dt), gab, gwd, gU, gV, gu,
                    np.empty(d, dtype), np.empty(r, dtype), np.empty(r, dtype),
                    int(steps))
    return g, gab[0], gab[1], gwd, gU, gV, gu


# ---------------------------------------------------------------------------
# RK4 integration
# ---------------------------------------------------------------------------


cdef void _stage(real[::1] y, real[:, ::1] W, real[:, ::1] u, Py_ssize_t b,
                 real alpha, real beta, real[::1] t_out, real[::1] k_out) noexcept nogil:
    cdef Py_ssize_t d = y.shape[0]
    cdef Py_ssize_t j, l
    cdef real acc, t
    for j in range(d):
        acc = 0
        for l in range(d):
            acc = acc + W[j, l] * y[l]
        t = <real>tanh(acc + u[b, j])
        t_out[j] = t
        k_out[j] = -(alpha * y[j]) + beta * t


def _rk4_fwd_loop(real[:, ::1] h, real[:, ::1] W, real[:, ::1] u, double alpha_,
                  double beta_, double dt_, real[:, :, ::1] h_hist,
                  real[:, :, :, ::1] t_hist, real[::1] y, real[::1] t,
                  real[::1] k1, real[::1] k2, real[::1] k3, real[::1] k4,
                  int steps, bint save):
    cdef real alpha = <real>alpha_, beta = <real>beta_, dt = <real>dt_
    cdef real half = <real>0.5 * dt, sixth = dt / <real>6.0
    cdef Py_ssize_t B = h.shape[0], d = h.shape[1]
    cdef Py_ssize_t k, b, j
    with nogil:
        for k in range(steps):
            for b in range(B):
                for j in range(d):
                    y[j] = h[b, j]
                _stage(y, W, u, b, alpha, beta, t, k1)
                if save:
                    for j in range(d):
                        h_hist[k, b, j] = h[b, j]
                        t_hist[k, 0, b, j] = t[j]
                for j in range(d):
                    y[j] = h[b, j] + half * k1[j]
                _stage(y, W, u, b, alpha, beta, t, k2)
                if save:
                    for j in range(d):
                        t_hist[k, 1, b, j] = t[j]
                for j in range(d):
                    y[j] = h[b, j] + half * k2[j]
                _stage(y, W, u, b, alpha, beta, t, k3)
                if save:
                    for j in range(d):
                        t_hist[k, 2, b, j] = t[j]
                for j in range(d):
                    y[j] = h[b, j] + dt * k3[j]
                _stage(y, W, u, b, alpha, beta, t, k4)
                if save:
                    for j in range(d):
                        t_hist[k, 3, b, j] = t[j]
                for j in range(d):
                    h[b, j] = h[b, j] + sixth * (k1[j] + 2 * (k2[j] + k3[j]) + k4[j])


def rk4_fwd(h0, W, alpha, beta, dt, steps, u, need_saved):
    dtype = h0.dtype
    h = np.ascontiguousarray(h0).copy()
    steps = int(steps)
    B, d = h.shape
    hshape = (steps, B, d) if need_saved else (1, 1, 1)
    tshape = (steps, 4, B, d) if need_saved else (1, 1, 1, 1)
    h_hist = np.empty(hshape, dtype)
    t_hist = np.empty(tshape, dtype)
    bufs = [np.empty(d, dtype) for _ in range(6)]
    _rk4_fwd_loop(h, np.ascontiguousarray(W), np.ascontiguousarray(u), float(alpha),
                  float(beta), float(dt), h_hist, t_hist, bufs[0], bufs[1], bufs[2],
                  bufs[3], bufs[4], bufs[5], steps, bool(need_saved))
    return h, ((h_hist, t_hist) if need_saved else None)


cdef void _stage_vjp(real[::1] y, real[:, :, :, ::1] tsav, Py_ssize_t k,
                     Py_ssize_t stage, Py_ssize_t b, real[::1] gk, real[:, ::1] W,
                     real alpha, real beta, real[::1] gab, real[:, ::1] gW,
                     real[:, ::1] gu, real[::1] gz, real[::1] gy_out) noexcept nogil:
    cdef Py_ssize_t d = y.shape[0]
    cdef Py_ssize_t j, l
    cdef real acc, t
    for j in range(d):
        t = tsav[k, stage, b, j]
        gab[0] = gab[0] - y[j] * gk[j]
        gab[1] = gab[1] + t * gk[j]
        gz[j] = (gk[j] * beta) * (1 - t * t)
        gu[b, j] = gu[b, j] + gz[j]
    for j in range(d):
        for l in range(d):
            gW[j, l] = gW[j, l] + gz[j] * y[l]
    for l in range(d):
        acc = 0
        for j in range(d):
            acc = acc + gz[j] * W[j, l]
        gy_out[l] = -(alpha * gk[l]) + acc


def _rk4_bwd_loop(real[:, ::1] g, real[:, :, ::1] h_hist, real[:, :, :, ::1] tsav,
                  real[:, ::1] W, double alpha_, double beta_, double dt_,
                  real[::1] gab, real[:, ::1] gW, real[:, ::1] gu, real[::1] y1,
                  real[::1] y2, real[::1] y3, real[::1] y4, real[::1] k1,
                  real[::1] k2, real[::1] k3, real[::1] gh, real[::1] gk1,
                  real[::1] gk2, real[::1] gk3, real[::1] gk4, real[::1] gz,
                  real[::1] gy, int steps):
    cdef real alpha = <real>alpha_, beta = <real>beta_, dt = <real>dt_
    cdef real half = <real>0.5 * dt, sixth = dt / <real>6.0, third = dt / <real>3.0
    cdef Py_ssize_t B = g.shape[0], d = g.shape[1]
    cdef Py_ssize_t k, b, j
    with nogil:
        for k in range(steps - 1, -1, -1):
            for b in range(B):
                for j in range(d):
                    y1[j] = h_hist[k, b, j]
                    k1[j] = -(alpha * y1[j]) + beta * tsav[k, 0, b, j]
                    y2[j] = y1[j] + half * k1[j]
                for j in range(d):
                    k2[j] = -(alpha * y2[j]) + beta * tsav[k, 1, b, j]
                    y3[j] = y1[j] + half * k2[j]
                for j in range(d):
                    k3[j] = -(alpha * y3[j]) + beta * tsav[k, 2, b, j]
                    y4[j] = y1[j] + dt * k3[j]
                for j in range(d):
                    gh[j] = g[b, j]
                    gk1[j] = sixth * g[b, j]
                    gk2[j] = third * g[b, j]
                    gk3[j] = third * g[b, j]
                    gk4[j] = sixth * g[b, j]
                _stage_vjp(y4, tsav, k, 3, b, gk4, W, alpha, beta, gab, gW, gu, gz, gy)
                for j in range(d):
                    gh[j] = gh[j] + gy[j]
                    gk3[j] = gk3[j] + dt * gy[j]
                _stage_vjp(y3, tsav, k, 2, b, gk3, W, alpha, beta, gab, gW, gu, gz, gy)
                for j in range(d):
                    gh[j] = gh[j] + gy[j]
                    gk2[j] = gk2[j] + half * gy[j]
                _stage_vjp(y2, tsav, k, 1, b, gk2, W, alpha, beta, gab, gW, gu, gz, gy)
                for j in range(d):
                    gh[j] = gh[j] + gy[j]
                    gk1[j] = gk1[j] + half * gy[j]
                _stage_vjp(y1, tsav, k, 0, b, gk1, W, alpha, beta, gab, gW, gu, gz, gy)
                for j in range(d):
                    g[b, j] = gh[j] + gy[j]


def rk4_bwd(saved, W, alpha, beta, dt, steps, g_out):
    h_hist, t_hist = saved
    dtype = g_out.dtype
    g = np.ascontiguousarray(g_out).copy()
    Wc = np.ascontiguousarray(W)
    d = Wc.shape[0]
    gab = np.zeros(2, dtype)
    gW = np.zeros_like(Wc)
    gu = np.zeros_like(g)
    bufs = [np.empty(d, dtype) for _ in range(14)]
    _rk4_bwd_loop(g, np.ascontiguousarray(h_hist), np.ascontiguousarray(t_hist), Wc,
                  float(alpha), float(beta), float(dt), gab, gW, gu, bufs[0], bufs[1],
                  bufs[2], bufs[3], bufs[4], bufs[5], bufs[6], bufs[7], bufs[8],
                  bufs[9], bufs[10], bufs[11], bufs[12], bufs[13], int(steps))
    return g, gab[0], gab[1], gW, gu


# ---------------------------------------------------------------------------
# Quantized inference primitives (double, bit-identical to fallback)
# ---------------------------------------------------------------------------

cdef double _pexp_c(double x) noexcept nogil:
    cdef double k = floor(x * 1.4426950408889634074 + 0.5)
    cdef double r = (x - k * 6.93147180369123816490e-01) - k * 1.90821492927058770002e-10
    cdef double p = _EXPC[13]
    cdef int i
    for i in range(12, -1, -1):
        p = p * r + _EXPC[i]
    return ldexp(p, <int>k)


cdef double _ptanh_c(double x) noexcept nogil:
    cdef double a = fabs(x)
    cdef double e, t
    if a <= 20.0:
        e = _pexp_c(2.0 * a)
        t = 1.0 - 2.0 / (e + 1.0)
    else:
        t = 1.0
    return copysign(t, x)


def ptanh(x):
    xs = np.ascontiguousarray(np.atleast_1d(np.asarray(x, np.float64)))
    out = np.empty_like(xs)
    cdef double[::1] xv = xs
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    for i in range(xv.shape[0]):
        ov[i] = _ptanh_c(xv[i])
    return out if np.ndim(x) else out[0]


def qlinear(xq, zp_in, s_in, wq, s_w, bias, s_out, zp_out):
    cdef const signed char[::1] xv = np.ascontiguousarray(xq, np.int8)
    cdef const signed char[:, ::1] wv = np.ascontiguousarray(wq, np.int8)
    cdef const float[::1] bv = np.ascontiguousarray(bias, np.float32)
    out = np.empty(wv.shape[0], np.int8)
    cdef signed char[::1] ov = out
    cdef int zin = zp_in, zout = zp_out
    cdef double sin = s_in, sout = s_out, ws = s_w
    cdef double combined = sin * ws
    cdef Py_ssize_t j, k, n_in = xv.shape[0], n_out = wv.shape[0]
    cdef int acc
    cdef double v, q
    with nogil:
        for j in range(n_out):
            acc = 0
            for k in range(n_in):
                acc += (<int>xv[k] - zin) * <int>wv[j, k]
            v = <double>acc * combined + <double>bv[j]
            q = <double>zout + copysign(floor(fabs(v / sout) + 0.5), v / sout)
            if q < -128.0:
                q = -128.0
            if q > 127.0:
                q = 127.0
            ov[j] = <signed char>q
    return out


def ln_f64(x, gain, bias, eps):
    xs = np.ascontiguousarray(x, np.float64)
    out = np.empty_like(xs)
    cdef double[::1] xv = xs
    cdef double[::1] ov = out
    cdef const float[::1] gv = np.ascontiguousarray(gain, np.float32)
    cdef const float[::1] bv = np.ascontiguousarray(bias, np.float32)
    cdef double e = eps
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double total = 0.0, var = 0.0, mean, dev, inv
    with nogil:
        for i in range(n):
            total += xv[i]
        mean = total / <double>n
        for i in range(n):
            dev = xv[i] - mean
            var += dev * dev
        var = var / <double>n
        inv = 1.0 / sqrt(var + e)
        for i in range(n):
            ov[i] = ((xv[i] - mean) * inv) * <double>gv[i] + <double>bv[i]
    return out


def qeuler(h, w_diag, U, V, rank, alpha, beta, dt, steps, u_mean):
    hc = np.array(h, np.float64)
    cdef double[::1] hv = hc
    cdef const double[::1] wdv = np.ascontiguousarray(w_diag, np.float64)
    cdef const double[:, ::1] Uv = np.ascontiguousarray(U, np.float64)
    cdef const double[:, ::1] Vv = np.ascontiguousarray(V, np.float64)
    s = np.empty(int(rank), np.float64)
    y = np.empty(hc.shape[0], np.float64)
    cdef double[::1] sv = s
    cdef double[::1] yv = y
    cdef double inv_r = 1.0 / <double>rank
    cdef double a = alpha, b = beta, step_dt = dt, u = u_mean
    cdef Py_ssize_t d = hv.shape[0], r = sv.shape[0], K = int(steps)
    cdef Py_ssize_t k, i, j, m
    cdef double acc, z, t
    with nogil:
        for k in range(K):
            for m in range(r):
                acc = 0.0
                for i in range(d):
                    acc += Vv[i, m] * hv[i]
                sv[m] = acc
            for j in range(d):
                acc = 0.0
                for m in range(r):
                    acc += Uv[j, m] * sv[m]
                yv[j] = acc
            for j in range(d):
                z = hv[j] * wdv[j] + yv[j] * inv_r
                z = z + u
                t = _ptanh_c(z)
                hv[j] = hv[j] + step_dt * (-(a * hv[j]) + b * t)
    return hc
