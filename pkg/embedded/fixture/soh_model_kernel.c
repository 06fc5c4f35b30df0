/* Generated int8 inference kernel. Self-contained; no heap use. */
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
    0x1.0000000000000p+0,
    0x1.0000000000000p+0,
    0x1.0000000000000p-1,
    0x1.5555555555555p-3,
    0x1.5555555555555p-5,
    0x1.1111111111111p-7,
    0x1.6c16c16c16c17p-10,
    0x1.a01a01a01a01ap-13,
    0x1.a01a01a01a01ap-16,
    0x1.71de3a556c734p-19,
    0x1.27e4fb7789f5cp-22,
    0x1.ae64567f544e4p-26,
    0x1.1eed8eff8d898p-29,
    0x1.6124613a86d09p-33
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
