/* Generated int8 model data. Do not edit. */
#ifndef SOH_MODEL_DATA_H
#define SOH_MODEL_DATA_H

#include <stdint.h>

#define SOH_TAU 24
#define SOH_TAU_PRIME 12
#define SOH_HIDDEN 8
#define SOH_ENC_WIDTH 16
#define SOH_DEC_WIDTH 16
#define SOH_DEC_MID 8
#define SOH_RANK 4
#define SOH_EULER_STEPS 8
#define SOH_NUM_BOUNDARIES 10
#define SOH_ALPHA 0x1.0a3f2e0000000p+0
#define SOH_BETA 0x1.0788c20000000p+0
#define SOH_EULER_DT 0x1.0000000000000p-3
#define SOH_LN_EPS 0x1.4f8b588e368f1p-17
#define SOH_WEIGHT_PAYLOAD_BYTES 1535

static const double soh_act_scale[SOH_NUM_BOUNDARIES] = {
    0x1.02bc949494949p-8, 0x1.62b81c5c5c5c6p-7, 0x1.aca8c6c6c6c6cp-7, 0x1.08828f0f0f0f1p-7, 0x1.9cc57d7d7d7d8p-9, 0x1.566c131313131p-8, 0x1.6745696969697p-7, 0x1.3d284a4a4a4a5p-7, 0x1.d4b0e0e0e0e0ep-8, 0x1.00801b1b1b1b2p-8
};
static const int32_t soh_act_zp[SOH_NUM_BOUNDARIES] = {
    -128, -97, -128, 28, -128, -43, -128, 9, -128, -128
};
static const char *const soh_boundary_name[SOH_NUM_BOUNDARIES] = {
    "input", "enc_expand", "enc_embed_in", "enc_embed", "state_out", "dec_expand", "dec_mid_in", "dec_mid", "dec_head_in", "output"
};
static const char *const soh_boundary_tensor[SOH_NUM_BOUNDARIES] = {
    "input", "w_enc1", "enc_norm1", "w_enc2", "dynamics", "w_dec1", "dec_norm1", "w_dec2", "dec_norm2", "w_dec3"
};

#define SOH_W_ENC1_SP 1
#define SOH_W_ENC1_SIZE 384
#define SOH_W_ENC1_BYTES 229
static const double soh_ws_w_enc1 = 0x1.2605f5ebd7af6p-9;
static const uint8_t soh_t_w_enc1_enc[229] = {
    198, 63, 51, 208, 97, 193, 119, 88, 228, 39, 217, 226, 242, 120, 6, 10, 187, 38, 103, 214,
    237, 8, 200, 200, 178, 181, 71, 34, 194, 82, 72, 130, 35, 166, 54, 5, 32, 179, 118, 248,
    108, 103, 134, 79, 162, 111, 85, 164, 208, 195, 172, 203, 197, 55, 191, 71, 201, 91, 75, 52,
    58, 72, 59, 78, 194, 81, 159, 164, 60, 213, 192, 80, 200, 65, 43, 76, 75, 202, 85, 203,
    72, 85, 81, 179, 65, 202, 182, 190, 168, 79, 57, 64, 61, 202, 72, 58, 197, 205, 52, 110,
    97, 84, 81, 190, 110, 78, 70, 106, 79, 204, 181, 50, 79, 195, 63, 59, 69, 167, 72, 209,
    104, 95, 72, 80, 67, 82, 187, 192, 192, 188, 199, 216, 208, 75, 198, 66, 184, 211, 183, 206,
    215, 98, 191, 196, 214, 65, 79, 97, 217, 68, 203, 72, 195, 99, 213, 92, 176, 195, 82, 76,
    194, 77, 177, 194, 55, 194, 86, 183, 81, 197, 184, 198, 67, 90, 95, 62, 64, 75, 65, 205,
    187, 210, 194, 191, 94, 57, 81, 205, 190, 62, 104, 66, 162, 67, 48, 168, 184, 71, 77, 79,
    71, 205, 72, 164, 199, 109, 124, 60, 86, 117, 55, 101, 67, 127, 96, 89, 167, 212, 74, 210,
    73, 193, 176, 80, 85, 172, 188, 189, 86
};

#define SOH_W_ENC2_SP 1
#define SOH_W_ENC2_SIZE 128
#define SOH_W_ENC2_BYTES 97
static const double soh_ws_w_enc2 = 0x1.186af5ebd7af6p-9;
static const uint8_t soh_t_w_enc2_enc[97] = {
    119, 239, 170, 108, 189, 119, 126, 253, 25, 114, 149, 69, 191, 125, 53, 232, 186, 59, 176, 173,
    156, 147, 187, 207, 155, 102, 59, 96, 190, 76, 147, 188, 95, 48, 96, 81, 133, 73, 111, 69,
    210, 159, 173, 53, 65, 161, 197, 122, 73, 198, 205, 160, 60, 127, 114, 169, 93, 160, 77, 187,
    176, 168, 56, 130, 203, 84, 58, 162, 172, 96, 60, 88, 100, 114, 57, 54, 173, 89, 51, 170,
    124, 188, 161, 152, 102, 194, 143, 111, 100, 180, 172, 95, 164, 181, 107, 155, 110
};

#define SOH_W_DEC1_SP 1
#define SOH_W_DEC1_SIZE 128
#define SOH_W_DEC1_BYTES 99
static const double soh_ws_w_dec1 = 0x1.e04f3870e1c38p-9;
static const uint8_t soh_t_w_dec1_enc[99] = {
    220, 110, 239, 35, 227, 253, 199, 199, 89, 223, 179, 215, 82, 221, 94, 236, 91, 86, 90, 230,
    224, 57, 190, 45, 205, 211, 183, 70, 215, 173, 49, 174, 175, 179, 204, 34, 202, 57, 62, 80,
    112, 168, 69, 228, 218, 33, 39, 181, 71, 181, 192, 202, 83, 60, 220, 201, 210, 211, 171, 31,
    77, 47, 189, 48, 212, 168, 227, 61, 204, 127, 70, 63, 217, 78, 210, 67, 92, 203, 193, 201,
    96, 82, 174, 54, 190, 200, 219, 54, 208, 73, 30, 94, 30, 91, 58, 74, 191, 87, 221
};

#define SOH_W_DEC2_SP 1
#define SOH_W_DEC2_SIZE 128
#define SOH_W_DEC2_BYTES 102
static const double soh_ws_w_dec2 = 0x1.0920102040810p-9;
static const uint8_t soh_t_w_dec2_enc[102] = {
    255, 251, 255, 97, 228, 244, 142, 171, 125, 189, 27, 232, 183, 244, 126, 241, 80, 122, 83, 59,
    70, 168, 93, 164, 188, 123, 99, 139, 197, 53, 127, 85, 186, 189, 97, 58, 185, 157, 57, 197,
    72, 178, 171, 98, 77, 86, 150, 186, 136, 196, 105, 171, 161, 105, 63, 102, 159, 210, 173, 79,
    89, 151, 147, 130, 109, 165, 150, 181, 190, 146, 164, 201, 175, 79, 188, 89, 171, 53, 65, 62,
    147, 204, 124, 185, 135, 77, 136, 76, 141, 97, 173, 204, 104, 192, 44, 92, 58, 43, 194, 43,
    107, 199
};

#define SOH_W_DEC3_SP 1
#define SOH_W_DEC3_SIZE 96
#define SOH_W_DEC3_BYTES 87
static const double soh_ws_w_dec3 = 0x1.07748d1a3468dp-8;
static const uint8_t soh_t_w_dec3_enc[87] = {
    123, 255, 123, 126, 252, 190, 214, 185, 254, 223, 191, 126, 89, 189, 65, 65, 206, 105, 112, 214,
    80, 95, 87, 42, 59, 39, 107, 26, 104, 227, 56, 87, 84, 62, 202, 212, 70, 79, 83, 228,
    191, 84, 221, 97, 75, 34, 103, 179, 56, 192, 64, 64, 74, 30, 175, 101, 186, 229, 55, 23,
    49, 102, 35, 47, 55, 233, 215, 213, 127, 203, 66, 58, 61, 55, 113, 185, 28, 226, 220, 81,
    73, 48, 178, 196, 225, 117, 51
};

#define SOH_W_DIAG_SP 0
#define SOH_W_DIAG_SIZE 8
#define SOH_W_DIAG_BYTES 8
static const double soh_ws_w_diag = 0x1.ef4a142850a14p-9;
static const int8_t soh_t_w_diag[8] = {
    -37, -47, 0, -105, -105, -69, -127, -44
};

#define SOH_U_LR_SP 1
#define SOH_U_LR_SIZE 32
#define SOH_U_LR_BYTES 30
static const double soh_ws_u_lr = 0x1.a7dc4a952a54bp-9;
static const uint8_t soh_t_u_lr_enc[30] = {
    191, 217, 255, 222, 174, 176, 190, 117, 170, 191, 205, 40, 92, 195, 219, 213, 150, 129, 48, 60,
    169, 194, 93, 67, 213, 91, 211, 215, 233, 176
};

#define SOH_V_LR_SP 1
#define SOH_V_LR_SIZE 32
#define SOH_V_LR_BYTES 27
static const double soh_ws_v_lr = 0x1.bd95122448912p-9;
static const uint8_t soh_t_v_lr_enc[27] = {
    237, 251, 213, 218, 113, 78, 40, 129, 50, 123, 52, 36, 49, 56, 66, 187, 39, 178, 97, 78,
    35, 141, 46, 209, 198, 113, 206
};

static const float soh_b_enc1[16] = {
    0x1.c5f9340000000p-7f, -0x1.53e6260000000p-6f, -0x1.41b7680000000p-14f, -0x1.aea7760000000p-8f, 0x1.b1c6ae0000000p-5f, -0x1.0d01720000000p-6f, 0x1.0bae320000000p-5f, 0x1.f1f9920000000p-6f,
    0x1.119ab60000000p-5f, 0x1.ada9c40000000p-7f, 0x1.21eeae0000000p-8f, 0x1.dd9cac0000000p-6f, 0x1.10b5900000000p-5f, -0x1.9587c40000000p-7f, 0x1.bb74760000000p-4f, -0x1.0e78440000000p-7f
};
static const float soh_b_enc2[8] = {
    0x1.c2d8880000000p-7f, -0x1.f8fc6c0000000p-5f, 0x1.120d120000000p-5f, 0x1.24c2a20000000p-5f, -0x1.17dace0000000p-4f, -0x1.d1ba640000000p-9f, 0x1.5c06460000000p-5f, 0x1.18b6880000000p-5f
};
static const float soh_b_dec1[16] = {
    0x1.dbc5320000000p-5f, 0x1.1e80ce0000000p-5f, 0x1.39251c0000000p-6f, 0x1.2feeb40000000p-5f, 0x1.32d7ae0000000p-4f, -0x1.6ae8e60000000p-6f, -0x1.1f72c80000000p-8f, 0x1.5af1c80000000p-5f,
    -0x1.9724e20000000p-5f, 0x1.f397940000000p-6f, 0x1.1182d20000000p-3f, 0x1.40cf000000000p-5f, 0x1.2c52c80000000p-5f, -0x1.211bd40000000p-7f, 0x1.0344e20000000p-4f, -0x1.04f5f40000000p-5f
};
static const float soh_b_dec2[8] = {
    0x1.49ca920000000p-4f, 0x1.29da400000000p-4f, -0x1.d76b160000000p-4f, -0x1.4784d40000000p-5f, -0x1.f1eba20000000p-4f, 0x1.054bea0000000p-6f, -0x1.d299be0000000p-4f, -0x1.4cc1f40000000p-6f
};
static const float soh_b_dec3[12] = {
    0x1.4c40560000000p-3f, 0x1.c7d9320000000p-4f, 0x1.a1ea360000000p-4f, 0x1.5acf1e0000000p-3f, 0x1.c118000000000p-4f, 0x1.6cf8280000000p-3f, -0x1.0778a40000000p-8f, 0x1.58cbe20000000p-3f,
    0x1.cee67e0000000p-4f, 0x1.171f7a0000000p-3f, 0x1.cb95540000000p-4f, 0x1.6121660000000p-3f
};
static const float soh_norm1_gain[16] = {
    0x1.f946720000000p-1f, 0x1.f05d900000000p-1f, 0x1.fcabc80000000p-1f, 0x1.f0ad9c0000000p-1f, 0x1.0bce7a0000000p+0f, 0x1.f632da0000000p-1f, 0x1.0000000000000p+0f, 0x1.0000000000000p+0f,
    0x1.0000000000000p+0f, 0x1.f812ec0000000p-1f, 0x1.f7c9bc0000000p-1f, 0x1.0247180000000p+0f, 0x1.0000000000000p+0f, 0x1.f988760000000p-1f, 0x1.1dc5760000000p+0f, 0x1.f531320000000p-1f
};
static const float soh_norm1_bias[16] = {
    -0x1.c4bd600000000p-7f, -0x1.1626f00000000p-5f, -0x1.180da40000000p-8f, -0x1.711fc00000000p-6f, 0x1.a334e40000000p-5f, -0x1.603e000000000p-6f, 0x0.0p+0f, 0x0.0p+0f,
    0x0.0p+0f, -0x1.fb627a0000000p-7f, -0x1.06d1160000000p-6f, 0x1.2ff8340000000p-7f, 0x0.0p+0f, -0x1.ece1280000000p-7f, 0x1.a48f260000000p-4f, -0x1.8c62780000000p-6f
};
static const float soh_norm2_gain[8] = {
    0x1.dfa1580000000p-1f, 0x1.ea9d4c0000000p-1f, 0x1.f9e3920000000p-1f, 0x1.f2884c0000000p-1f, 0x1.fcfe100000000p-1f, 0x1.f5f4ca0000000p-1f, 0x1.011bde0000000p+0f, 0x1.e7827c0000000p-1f
};
static const float soh_norm2_bias[8] = {
    0x1.da203e0000000p-6f, 0x1.4d34520000000p-6f, 0x1.adcc660000000p-5f, 0x1.60bfb20000000p-5f, -0x1.1d4f3e0000000p-4f, -0x1.48dfdc0000000p-6f, 0x1.07da280000000p-8f, 0x1.6dda0e0000000p-5f
};
static const float soh_norm3_gain[16] = {
    0x1.0c09fa0000000p+0f, 0x1.0000000000000p+0f, 0x1.0000000000000p+0f, 0x1.0000000000000p+0f, 0x1.0cde380000000p+0f, 0x1.f33b260000000p-1f, 0x1.ee489a0000000p-1f, 0x1.0000000000000p+0f,
    0x1.e50cba0000000p-1f, 0x1.0000000000000p+0f, 0x1.23cf080000000p+0f, 0x1.0000000000000p+0f, 0x1.f3b04c0000000p-1f, 0x1.f4ee4e0000000p-1f, 0x1.0fa74a0000000p+0f, 0x1.f12a5a0000000p-1f
};
static const float soh_norm3_bias[16] = {
    0x1.a3ffd40000000p-5f, 0x0.0p+0f, 0x0.0p+0f, 0x0.0p+0f, 0x1.d69e060000000p-5f, -0x1.d220b40000000p-6f, -0x1.0602a20000000p-5f, 0x0.0p+0f,
    -0x1.2187440000000p-4f, 0x0.0p+0f, 0x1.ee74200000000p-4f, 0x0.0p+0f, -0x1.7baac00000000p-6f, -0x1.7cd5300000000p-6f, 0x1.ecc8500000000p-5f, -0x1.50fbaa0000000p-5f
};
static const float soh_norm4_gain[8] = {
    0x1.2f891e0000000p+0f, 0x1.28c01c0000000p+0f, 0x1.f3c3f40000000p-1f, 0x1.f17b060000000p-1f, 0x1.0444a00000000p+0f, 0x1.207eac0000000p+0f, 0x1.0000000000000p+0f, 0x1.1b46be0000000p+0f
};
static const float soh_norm4_bias[8] = {
    0x1.80bee80000000p-3f, 0x1.8a987e0000000p-3f, -0x1.abf5f40000000p-6f, 0x1.3108c00000000p-5f, 0x1.1139a80000000p-6f, 0x1.6622640000000p-3f, 0x0.0p+0f, 0x1.06bac40000000p-3f
};

#endif /* SOH_MODEL_DATA_H */
