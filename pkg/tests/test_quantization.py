import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sohcast import backend
from sohcast.compression import magnitude_prune
from sohcast.data import stack_windows
from sohcast.distillation import DistillConfig, DistillKind, train_student
from sohcast.errors import ConfigError, EmissionError
from sohcast.models import StudentModel, model_forward
from sohcast.quantization import (calibrate, emit_embedded_source,
                                  make_golden_vectors, payload_entries,
                                  quantize_int8, quantized_forward,
                                  quantized_payload_size, range_to_qparams,
                                  sparse_decode, sparse_encode, weight_qparams)
from tests.conftest import TOY_HORIZON, TOY_WINDOW


@pytest.fixture(scope="module")
def trained_student(toy_teacher, toy_split):
    s = StudentModel(TOY_WINDOW, TOY_HORIZON, hidden_dim=8, seed=31,
                     alpha_init=float(toy_teacher.alpha.data),
                     beta_init=float(toy_teacher.beta.data))
    cfg = DistillConfig(epochs=30, lambda_step=0.027, lr=3e-3,
                        distill_kind=DistillKind.MSE)
    train_student(toy_teacher, s, toy_split.train, cfg, seed=31, record_id="q-model")
    return s


@pytest.fixture(scope="module")
def quantized(trained_student, toy_split):
    ranges = calibrate(trained_student, toy_split.train[:64])
    return quantize_int8(trained_student, ranges)


class TestCalibrate:
    def test_constant_positive_includes_zero(self, trained_student, toy_split):
        ranges = calibrate(trained_student, toy_split.train[:8])
        lo, hi = ranges[0]
        assert lo <= 0.0 <= hi
        assert hi > 0.5  # SoH inputs

    def test_range_spans_observations(self):
        qp = range_to_qparams(-1.0, 2.0)
        assert qp.scale == pytest.approx(3.0 / 255.0)
        # v=min maps to -128, v=max to 127
        assert -128 + round(-(-1.0) / qp.scale) <= 127

    def test_affine_identities(self):
        for lo, hi in [(-1.0, 2.0), (0.0, 5.0), (-3.0, 0.0)]:
            qp = range_to_qparams(lo, hi)
            q_lo = qp.zero_point + backend.round_away(lo / qp.scale)
            q_hi = qp.zero_point + backend.round_away(hi / qp.scale)
            assert -129 <= q_lo <= -127  # rounding of zero_point costs at most 1
            assert 126 <= q_hi <= 128

    def test_empty_calibration_rejected(self, trained_student):
        with pytest.raises(ConfigError):
            calibrate(trained_student, [])


class TestQuantizeInt8:
    def test_hand_formula(self):
        qp = weight_qparams(np.array([-1.0, 0.5, 1.0], np.float32))
        assert qp.scale == pytest.approx(1 / 127)
        q = backend.round_away(np.array([-1.0, 0.5, 1.0]) / qp.scale)
        np.testing.assert_array_equal(np.clip(q, -127, 127), [-127, 64, 127])

    @given(st.lists(st.floats(-10, 10, width=32), min_size=1, max_size=64))
    @settings(max_examples=60, deadline=None)
    def test_round_trip_error_bound(self, vals):
        w = np.array(vals, np.float32)
        qp = weight_qparams(w)
        q = np.clip(backend.round_away(w.astype(np.float64) / qp.scale), -127, 127)
        back = q * qp.scale
        assert np.all(np.abs(w - back) <= qp.scale / 2 + 1e-12)

    def test_masked_positions_are_zero(self, toy_teacher, toy_split, trained_student):
        pruned, mask = magnitude_prune(trained_student, 0.5)
        ranges = calibrate(pruned, toy_split.train[:32])
        qm = quantize_int8(pruned, ranges, sparsity=0.5)
        for name, qw in qm.weights.items():
            float_zeros = {"w_enc1": pruned.enc1.weight, "w_enc2": pruned.enc2.weight,
                           "w_dec1": pruned.dec1.weight, "w_dec2": pruned.dec2.weight,
                           "w_dec3": pruned.dec3.weight, "w_diag": pruned.w_diag,
                           "u_lr": pruned.U, "v_lr": pruned.V}[name].data == 0
            assert np.all(qw[float_zeros] == 0)

    def test_all_zero_tensor_degenerate_scale(self):
        qp = weight_qparams(np.zeros(8, np.float32))
        assert qp.scale == 1.0

    def test_weight_range_symmetric(self, quantized):
        for qw in quantized.weights.values():
            assert qw.min() >= -127 and qw.max() <= 127


class TestQuantizedForward:
    def test_determinism(self, quantized, toy_split):
        x = toy_split.test[0].x
        a = quantized_forward(quantized, x)
        b = quantized_forward(quantized, x)
        np.testing.assert_array_equal(a, b)

    def test_mae_inflation_small(self, quantized, trained_student, toy_split):
        X, Y = stack_windows(toy_split.test)
        qpred = np.stack([quantized_forward(quantized, x) for x in X])
        fpred = model_forward(trained_student, X)
        mae_q = np.abs(qpred - Y).mean()
        mae_f = np.abs(fpred - Y).mean()
        assert mae_q - mae_f <= 0.005

    def test_identity_linear_within_one_step(self):
        """An identity-weight int8 linear keeps values within one scale step."""
        n = 8
        x = np.linspace(0.2, 1.0, n).astype(np.float32)
        qp = range_to_qparams(0.0, 1.2)
        wqp = weight_qparams(np.eye(n, dtype=np.float32))  # scale 1/127
        wq = np.eye(n, dtype=np.int8) * 127
        xq = backend.quant_f64(x, qp.scale, qp.zero_point)
        yq = backend.qlinear(xq, qp.zero_point, qp.scale, wq, wqp.scale,
                             np.zeros(n, np.float32), qp.scale, qp.zero_point)
        y = backend.dequant_f64(yq, qp.scale, qp.zero_point)
        assert np.all(np.abs(y - x) <= qp.scale + 1e-12)

    def test_boundary_capture_count(self, quantized, toy_split):
        cap = []
        quantized_forward(quantized, toy_split.test[0].x, capture=cap)
        assert len(cap) == 10
        assert all(c.dtype == np.int8 for c in cap)


class TestSparseCodec:
    @given(st.lists(st.integers(-127, 127), min_size=1, max_size=500),
           st.floats(0.0, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_roundtrip(self, vals, zero_frac):
        arr = np.array(vals, np.int8)
        arr[: int(len(arr) * zero_frac)] = 0
        assert np.array_equal(sparse_decode(sparse_encode(arr), arr.size), arr)

    def test_sparsity_reduces_payload(self, trained_student, toy_split):
        sizes = {}
        for s in (0.0, 0.5, 0.9):
            pruned, _ = magnitude_prune(trained_student, s)
            ranges = calibrate(pruned, toy_split.train[:16])
            qm = quantize_int8(pruned, ranges, sparsity=s)
            sizes[s] = quantized_payload_size(qm)
        assert sizes[0.9] < sizes[0.5] < sizes[0.0]

    def test_zero_count_preserved_in_int8(self, trained_student, toy_split):
        pruned, mask = magnitude_prune(trained_student, 0.6)
        ranges = calibrate(pruned, toy_split.train[:16])
        qm = quantize_int8(pruned, ranges, sparsity=0.6)
        int8_zeros = sum(int((w == 0).sum()) for w in qm.weights.values())
        assert int8_zeros >= mask.zero_count()


class TestEmission:
    def test_byte_identical_bundles(self, quantized, toy_split):
        gv = make_golden_vectors(quantized, toy_split.train, 16, seed=1)
        a = emit_embedded_source(quantized, gv)
        b = emit_embedded_source(quantized, make_golden_vectors(
            quantized, toy_split.train, 16, seed=1))
        assert a == b

    def test_golden_row_count(self, quantized, toy_split):
        gv = make_golden_vectors(quantized, toy_split.train, 16, seed=1)
        bundle = emit_embedded_source(quantized, gv)
        rows = bundle["golden.csv"].strip().split("\n")[1:]
        n_inter = sum(len(c) for c in gv.boundaries[0])
        per_vec = quantized.window + n_inter + quantized.horizon
        assert len(rows) == 16 * per_vec
        assert gv.inputs.shape[0] == 16

    def test_payload_size_matches_emitted_entries(self, quantized):
        from sohcast.quantization import _emit_data_header

        entries = payload_entries(quantized)
        weight_bytes = sum(len(b) for _, b, _, _ in entries)
        assert quantized_payload_size(quantized) >= weight_bytes
        header = _emit_data_header(quantized, entries)
        assert f"SOH_WEIGHT_PAYLOAD_BYTES {quantized_payload_size(quantized)}" in header

    def test_unsupported_tensor_rejected(self, quantized, toy_split):
        gv = make_golden_vectors(quantized, toy_split.train, 2, seed=1)
        import dataclasses

        bad = dataclasses.replace(quantized, weights=dict(quantized.weights))
        bad.weights["w_extra"] = np.zeros(3, np.int8)
        with pytest.raises(EmissionError, match="w_extra"):
            emit_embedded_source(bad, gv)

    def test_golden_vectors_regenerable(self, quantized, toy_split):
        a = make_golden_vectors(quantized, toy_split.train, 8, seed=5)
        b = make_golden_vectors(quantized, toy_split.train, 8, seed=5)
        np.testing.assert_array_equal(a.inputs, b.inputs)
        np.testing.assert_array_equal(a.outputs, b.outputs)


class TestPortableMath:
    @given(st.floats(-30, 30))
    @settings(max_examples=200, deadline=None)
    def test_ptanh_matches_libm(self, x):
        assert abs(float(backend.ptanh(np.array([x]))[0]) - math.tanh(x)) < 1e-12

    @given(st.floats(0, 45))
    @settings(max_examples=200, deadline=None)
    def test_pexp_matches_libm(self, x):
        rel = abs(float(backend.pexp(np.array([x]))[0]) - math.exp(x)) / math.exp(x)
        assert rel < 1e-14

    def test_round_away(self):
        vals = np.array([0.5, -0.5, 1.5, -1.5, 2.4, -2.4, 0.0])
        np.testing.assert_array_equal(backend.round_away(vals),
                                      [1, -1, 2, -2, 2, -2, 0])
