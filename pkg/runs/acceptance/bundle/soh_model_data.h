/* Generated int8 model data. Do not edit. */
#ifndef SOH_MODEL_DATA_H
#define SOH_MODEL_DATA_H

#include <stdint.h>

#define SOH_TAU 32
#define SOH_TAU_PRIME 32
#define SOH_HIDDEN 4
#define SOH_ENC_WIDTH 8
#define SOH_DEC_WIDTH 8
#define SOH_DEC_MID 4
#define SOH_RANK 3
#define SOH_EULER_STEPS 8
#define SOH_NUM_BOUNDARIES 10
#define SOH_ALPHA 0x1.fadcb80000000p-1
#define SOH_BETA 0x1.1723b00000000p+0
#define SOH_EULER_DT 0x1.0000000000000p-3
#define SOH_LN_EPS 0x1.4f8b588e368f1p-17
#define SOH_WEIGHT_PAYLOAD_BYTES 1156

static const double soh_act_scale[SOH_NUM_BOUNDARIES] = {
    0x1.048a141414141p-8, 0x1.719ecacacacadp-6, 0x1.a0ef8d8d8d8d9p-7, 0x1.9d2c98989898ap-7, 0x1.61544e4e4e4e5p-8, 0x1.bbd8ebebebebfp-8, 0x1.353fcfcfcfcfdp-8, 0x1.0982666666666p-6, 0x1.ad92686868687p-8, 0x1.fed4787878788p-9
};
static const int32_t soh_act_zp[SOH_NUM_BOUNDARIES] = {
    -128, -45, -128, -46, -28, 14, -128, 6, -128, -128
};
static const char *const soh_boundary_name[SOH_NUM_BOUNDARIES] = {
    "input", "enc_expand", "enc_embed_in", "enc_embed", "state_out", "dec_expand", "dec_mid_in", "dec_mid", "dec_head_in", "output"
};
static const char *const soh_boundary_tensor[SOH_NUM_BOUNDARIES] = {
    "input", "w_enc1", "enc_norm1", "w_enc2", "dynamics", "w_dec1", "dec_norm1", "w_dec2", "dec_norm2", "w_dec3"
};

#define SOH_W_ENC1_SP 0
#define SOH_W_ENC1_SIZE 256
#define SOH_W_ENC1_BYTES 256
static const double soh_ws_w_enc1 = 0x1.46912a54a952ap-9;
static const int8_t soh_t_w_enc1[256] = {
    -30, 0, 0, 0, -39, -18, 34, 0, 14, 65, -42, -44, 0, -61, 0, 46, -69, 10, 0, -18,
    0, 31, -97, 15, 2, 33, -98, -93, -26, -104, 0, -85, 50, 59, 81, 61, -14, 0, 100, -28,
    -22, -14, 40, 0, 86, 15, -6, 66, 78, 79, 11, 106, -24, 111, 12, 97, 109, 1, -2, 111,
    0, 90, 74, 51, -46, 62, 43, -19, -52, -27, 17, -77, 0, 50, -47, 0, 0, 28, 3, -88,
    39, 8, -81, -47, -56, 20, -99, 1, -61, 15, -21, -88, 7, 0, -99, 24, -30, 26, 0, 29,
    0, -35, -46, 36, 17, -100, 0, -65, 13, 34, -62, 0, 10, -95, -58, -77, 12, 40, -74, -84,
    17, -1, -74, 39, -61, -4, -63, 15, 59, 20, -50, 43, -47, 60, 0, 77, -21, 48, 51, 61,
    83, -17, -7, 0, 0, 85, 34, 64, 1, 64, -25, 84, 67, 57, -8, 0, 15, 53, -27, 92,
    -51, -53, 76, -46, 13, 53, 21, -20, 11, 59, -54, 0, -72, -80, -40, 29, -50, 0, 0, -6,
    -24, -92, -9, -97, -11, -60, -88, -100, -58, 20, -9, -63, 127, 76, 0, 23, 70, 0, 75, 122,
    23, 7, 85, 64, 100, 20, 55, 1, 0, 54, -27, 60, 83, 56, 89, 58, 0, 93, -8, 90,
    -32, -5, -26, 50, -72, -67, 56, 0, 41, -63, 20, -48, 17, -49, -35, 53, 0, -38, 40, -80,
    -54, 0, 1, -63, 13, -75, 16, 44, 0, 0, -40, -54, -68, -50, -3, 20
};

#define SOH_W_ENC2_SP 0
#define SOH_W_ENC2_SIZE 32
#define SOH_W_ENC2_BYTES 32
static const double soh_ws_w_enc2 = 0x1.1f70122448912p-8;
static const int8_t soh_t_w_enc2[32] = {
    -22, 14, 57, 0, -18, -16, -67, -20, -70, 127, 2, -29, 50, 70, 77, -28, 46, 77, 24, -65,
    22, -26, 9, 3, -55, 38, 58, 39, 0, 34, -42, 9
};

#define SOH_W_DEC1_SP 0
#define SOH_W_DEC1_SIZE 32
#define SOH_W_DEC1_BYTES 32
static const double soh_ws_w_dec1 = 0x1.c08ec58b162c6p-8;
static const int8_t soh_t_w_dec1[32] = {
    34, 76, 67, 0, 42, 15, 15, 52, -65, 22, 20, -10, 64, -33, 97, -10, -21, 29, 73, 65,
    -49, -44, 85, -47, -76, 30, 28, -13, -99, -85, -18, -127
};

#define SOH_W_DEC2_SP 0
#define SOH_W_DEC2_SIZE 32
#define SOH_W_DEC2_BYTES 32
static const double soh_ws_w_dec2 = 0x1.65fa972e5cb97p-7;
static const int8_t soh_t_w_dec2[32] = {
    2, 0, -33, 23, 2, -21, -7, -43, -28, -22, -53, -127, -35, -58, -45, 0, 0, -46, 15, -18,
    0, 48, 43, 43, -4, -23, -9, -21, -5, 0, 13, -20
};

#define SOH_W_DEC3_SP 0
#define SOH_W_DEC3_SIZE 128
#define SOH_W_DEC3_BYTES 128
static const double soh_ws_w_dec3 = 0x1.4b39ad5ab56adp-8;
static const int8_t soh_t_w_dec3[128] = {
    100, -9, 24, 127, 91, 89, -49, 101, 104, -88, 43, 119, 108, -81, 69, 123, 103, 0, 29, 106,
    109, 101, 71, 113, 101, -51, 0, 87, 108, -56, 57, 102, 99, 44, -23, 70, 108, -68, 47, 86,
    106, 42, 20, 72, 101, -21, -24, 58, 108, -39, 29, 63, 102, -78, -26, 46, 106, -58, 0, 49,
    106, 66, 0, 42, 113, -86, 48, 53, 103, 0, -29, 27, 109, 12, 9, 32, 104, 103, -34, 19,
    111, 86, 18, 26, 113, -8, 24, 23, 117, -27, 54, 29, 118, 16, 55, 25, 110, 29, -11, 2,
    107, 0, -31, -9, 113, -34, 14, -1, 111, -22, -7, -8, 104, -58, -62, -30, 112, 83, -3, -12,
    116, -69, 27, 0, 110, 102, -26, -27
};

#define SOH_W_DIAG_SP 0
#define SOH_W_DIAG_SIZE 4
#define SOH_W_DIAG_BYTES 4
static const double soh_ws_w_diag = 0x1.66d274e9d3a75p-8;
static const int8_t soh_t_w_diag[4] = {
    71, -17, -127, -14
};

#define SOH_U_LR_SP 0
#define SOH_U_LR_SIZE 12
#define SOH_U_LR_BYTES 12
static const double soh_ws_u_lr = 0x1.dcf59d3a74e9dp-8;
static const int8_t soh_t_u_lr[12] = {
    51, -118, 13, 127, -33, -46, 39, -41, -2, -3, -89, -20
};

#define SOH_V_LR_SP 0
#define SOH_V_LR_SIZE 12
#define SOH_V_LR_BYTES 12
static const double soh_ws_v_lr = 0x1.2fd8b76eddbb7p-8;
static const int8_t soh_t_v_lr[12] = {
    77, -90, -73, 0, 105, -86, 113, -35, 25, 127, -119, -64
};

static const float soh_b_enc1[8] = {
    0x1.835c780000000p-3f, -0x1.aaf60e0000000p-3f, 0x1.5610ea0000000p-3f, 0x1.9473220000000p-3f, -0x1.d02cc20000000p-4f, 0x1.02a5000000000p-3f, 0x1.c8010a0000000p-2f, 0x1.6009440000000p-3f
};
static const float soh_b_enc2[4] = {
    -0x1.be68600000000p-4f, 0x1.ac52de0000000p-3f, 0x1.c067140000000p-5f, -0x1.fb7f240000000p-5f
};
static const float soh_b_dec1[8] = {
    0x1.3344fe0000000p-4f, -0x1.1c07980000000p-5f, 0x1.bdea9c0000000p-5f, 0x1.5fc31c0000000p-7f, 0x1.ce838c0000000p-5f, 0x1.00d2be0000000p-3f, -0x1.0b60380000000p-7f, -0x1.4825fe0000000p-4f
};
static const float soh_b_dec2[4] = {
    0x1.69ff1a0000000p-3f, -0x1.66d50c0000000p-2f, 0x1.23a5180000000p-3f, 0x1.f607e40000000p-5f
};
static const float soh_b_dec3[32] = {
    0x1.791e720000000p-6f, 0x1.e8ef760000000p-4f, -0x1.52763a0000000p-10f, -0x1.2c7bb40000000p-5f, 0x1.171c9e0000000p-6f, -0x1.42e7020000000p-5f, 0x1.be34c80000000p-5f, -0x1.7c26ce0000000p-6f,
    0x1.58b9280000000p-4f, -0x1.09784a0000000p-7f, 0x1.b34efe0000000p-6f, 0x1.518da00000000p-4f, 0x1.02773a0000000p-6f, 0x1.548bbc0000000p-4f, 0x1.8ef8b60000000p-5f, 0x1.acf74e0000000p-5f,
    -0x1.b9c68a0000000p-7f, 0x1.6bdf5a0000000p-4f, 0x1.360ed80000000p-5f, 0x1.80fdfe0000000p-4f, 0x1.97c35c0000000p-6f, 0x1.22de040000000p-6f, -0x1.6db67a0000000p-6f, -0x1.ae4d6c0000000p-6f,
    0x1.ffeff00000000p-5f, 0x1.71fd6c0000000p-4f, 0x1.1693da0000000p-5f, 0x1.e2e6bc0000000p-5f, 0x1.14a7600000000p-3f, 0x1.b37dd40000000p-5f, 0x1.5780be0000000p-7f, 0x1.57cb580000000p-4f
};
static const float soh_norm1_gain[8] = {
    0x1.edd5720000000p-1f, 0x1.35a6d40000000p+0f, 0x1.d9d6fa0000000p-1f, 0x1.eef74a0000000p-1f, 0x1.0becee0000000p+0f, 0x1.e33cda0000000p-1f, 0x1.458d320000000p+0f, 0x1.f1a5380000000p-1f
};
static const float soh_norm1_bias[8] = {
    -0x1.0020780000000p-4f, 0x1.65d11c0000000p-3f, -0x1.8131000000000p-5f, -0x1.d1285c0000000p-6f, 0x1.17efaa0000000p-4f, -0x1.06560a0000000p-4f, 0x1.eeb7440000000p-3f, -0x1.59a26a0000000p-7f
};
static const float soh_norm2_gain[4] = {
    0x1.1bf7660000000p+0f, 0x1.0db1900000000p+0f, 0x1.963eac0000000p-1f, 0x1.fdec820000000p-1f
};
static const float soh_norm2_bias[4] = {
    -0x1.ac8bc20000000p-4f, 0x1.2c09340000000p-4f, -0x1.317ec20000000p-5f, -0x1.0863420000000p-3f
};
static const float soh_norm3_gain[8] = {
    0x1.0c9cda0000000p-1f, 0x1.0eeda60000000p+0f, 0x1.136c340000000p+0f, 0x1.00ca860000000p+1f, 0x1.39d57c0000000p-1f, 0x1.2885880000000p+0f, 0x1.34b5540000000p+0f, 0x1.0a847c0000000p+0f
};
static const float soh_norm3_bias[8] = {
    -0x1.a3d4ca0000000p-2f, -0x1.551be00000000p-3f, -0x1.9b71160000000p-4f, -0x1.2a44880000000p-4f, -0x1.5530420000000p-2f, 0x1.1b9f1e0000000p-2f, -0x1.61f8c60000000p-4f, 0x1.0fd3380000000p-1f
};
static const float soh_norm4_gain[4] = {
    0x1.75e6d00000000p+0f, 0x1.edaec80000000p-1f, 0x1.30d5b00000000p-2f, 0x1.d5bfba0000000p-1f
};
static const float soh_norm4_bias[4] = {
    0x1.94410a0000000p-2f, -0x1.2fcb560000000p-5f, -0x1.b9786e0000000p-3f, -0x1.705c8a0000000p-5f
};

#endif /* SOH_MODEL_DATA_H */
