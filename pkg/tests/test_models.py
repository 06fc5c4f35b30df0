import numpy as np
import pytest

from sohcast.data import stack_windows
from sohcast.distillation import DistillConfig, DistillKind, train_student
from sohcast.errors import ConfigError, InputError
from sohcast.models import (Mode, StudentModel, TeacherModel, euler_rollout,
                            integrate_ode, lowrank_matvec, model_forward,
                            teacher_dynamics_deriv)
from sohcast.rng import make_rng
from tests.conftest import TOY_HORIZON, TOY_WINDOW


def dense_equivalent(student):
    """Materialized W' = diag(w_diag) + U V^T / rank (oracle only)."""
    return (np.diag(student.w_diag.data.astype(np.float64))
            + student.U.data.astype(np.float64) @ student.V.data.T.astype(np.float64)
            / student.rank)


class TestDynamicsDeriv:
    def test_origin_fixed_point(self):
        d = teacher_dynamics_deriv(np.zeros(4), 1.0, 1.0, np.eye(4), np.zeros(4))
        np.testing.assert_allclose(d, np.zeros(4))

    def test_pure_decay(self):
        h = np.array([0.5, -1.0, 2.0])
        d = teacher_dynamics_deriv(h, 1.0, 0.0, np.eye(3), np.zeros(3))
        np.testing.assert_allclose(d, -h)

    def test_tanh_drive(self):
        d = teacher_dynamics_deriv(np.zeros(3), 0.0, 1.0, np.zeros((3, 3)),
                                   np.full(3, 0.5))
        np.testing.assert_allclose(d, np.full(3, np.tanh(0.5)), atol=1e-6)
        assert abs(d[0] - 0.46212) < 1e-5


class TestIntegrateOde:
    def _teacher(self, steps, alpha=1.3, beta=0.0, d=3):
        t = TeacherModel(4, 2, hidden_dim=d, steps=steps, seed=0, dtype=np.float64)
        t.alpha.data = np.asarray(alpha, np.float64)
        t.beta.data = np.asarray(beta, np.float64)
        return t

    def test_linear_ode_closed_form(self):
        h0 = np.array([0.7, -0.4, 1.1])
        hT = integrate_ode(self._teacher(20), h0, np.zeros(3))
        np.testing.assert_allclose(hT, h0 * np.exp(-1.3), atol=1e-6)

    def test_zero_derivative_identity(self):
        h0 = np.array([0.7, -0.4, 1.1])
        hT = integrate_ode(self._teacher(20, alpha=0.0, beta=0.0), h0, np.zeros(3))
        np.testing.assert_allclose(hT, h0)

    def test_fourth_order_convergence(self):
        h0 = np.array([0.7, -0.4, 1.1])
        exact = h0 * np.exp(-1.3)
        errs = [np.abs(integrate_ode(self._teacher(s), h0, np.zeros(3)) - exact).max()
                for s in (5, 10, 20)]
        for e_coarse, e_fine in zip(errs, errs[1:]):
            assert 12.0 <= e_coarse / e_fine <= 20.0


class TestEulerRollout:
    def test_single_zero_step(self):
        s = StudentModel(4, 2, hidden_dim=4, euler_steps=1, t_end=1.0, seed=1,
                         dtype=np.float64)
        s.alpha.data = np.asarray(0.0, np.float64)
        s.beta.data = np.asarray(0.0, np.float64)
        h0 = np.array([1.0, -2.0, 0.5, 0.25])
        np.testing.assert_allclose(euler_rollout(s, h0, np.zeros(4)), h0)

    def test_explicit_formula(self):
        s = StudentModel(4, 2, hidden_dim=4, euler_steps=1, t_end=0.25, seed=1,
                         dtype=np.float64)
        s.alpha.data = np.asarray(2.0, np.float64)
        s.beta.data = np.asarray(0.0, np.float64)
        h0 = np.array([1.0, -2.0, 0.5, 0.25])
        np.testing.assert_allclose(euler_rollout(s, h0, np.zeros(4)),
                                   h0 * (1 - 2.0 * 0.25))

    def test_first_order_convergence(self):
        base = StudentModel(4, 2, hidden_dim=8, rank=3, euler_steps=8, seed=5,
                            dtype=np.float64)
        ref_teacher = TeacherModel(4, 2, hidden_dim=8, steps=400, seed=0,
                                   dtype=np.float64)
        ref_teacher.W.data = dense_equivalent(base)
        ref_teacher.alpha.data = base.alpha.data.copy()
        ref_teacher.beta.data = base.beta.data.copy()
        h0 = np.linspace(-0.5, 0.5, 8)
        u = np.full(8, 0.3)
        ref = integrate_ode(ref_teacher, h0, u)
        errs = []
        for K in (8, 16, 32, 64):
            s = StudentModel(4, 2, hidden_dim=8, rank=3, euler_steps=K, seed=5,
                             dtype=np.float64)
            errs.append(np.abs(euler_rollout(s, h0, u) - ref).max())
        for e_coarse, e_fine in zip(errs, errs[1:]):
            assert 1.5 <= e_coarse / e_fine <= 2.5


class TestLowRank:
    def test_diag_only(self):
        wd = np.array([2.0, -1.0, 0.5])
        h = np.array([1.0, 2.0, 4.0])
        out = lowrank_matvec(wd, np.zeros((3, 1)), np.zeros((3, 1)), 1, h)
        np.testing.assert_allclose(out, wd * h)

    def test_rank_one_ones(self):
        d = 3
        ones = np.ones((d, 1))
        out = lowrank_matvec(np.zeros(d), ones, ones, 1, np.eye(d)[0])
        np.testing.assert_allclose(out, np.ones(d))

    def test_dense_oracle_random(self):
        rng = make_rng(17)
        for _ in range(100):
            d = int(rng.integers(2, 17))
            r = int(rng.integers(1, d))
            wd, h = rng.normal(size=d), rng.normal(size=d)
            U, V = rng.normal(size=(d, r)), rng.normal(size=(d, r))
            dense = (np.diag(wd) + U @ V.T / r) @ h
            np.testing.assert_allclose(lowrank_matvec(wd, U, V, r, h), dense,
                                       atol=1e-5)


class TestModelForward:
    def test_zeroed_head_gives_zero_forecast(self):
        s = StudentModel(8, 4, hidden_dim=4, seed=2)
        s.dec3.weight.data[:] = 0
        s.dec3.bias.data[:] = 0
        out = model_forward(s, np.linspace(1.0, 0.9, 8).astype(np.float32))
        np.testing.assert_array_equal(out, np.zeros(4, np.float32))

    def test_deterministic_purity(self):
        s = StudentModel(8, 4, hidden_dim=8, seed=3)
        x = np.linspace(1.0, 0.8, 8).astype(np.float32)
        np.testing.assert_array_equal(model_forward(s, x), model_forward(s, x))

    def test_window_length_checked(self):
        s = StudentModel(8, 4, hidden_dim=4, seed=2)
        with pytest.raises(InputError):
            model_forward(s, np.ones(7, np.float32))

    def test_interface_matches_teacher(self, toy_teacher):
        s = StudentModel(TOY_WINDOW, TOY_HORIZON, hidden_dim=4, seed=0)
        x = np.linspace(1.0, 0.9, TOY_WINDOW).astype(np.float32)
        assert model_forward(s, x).shape == model_forward(toy_teacher, x).shape

    def test_fit_linear_decay(self, linear_decay_split):
        from tests.conftest import LIN_HORIZON, LIN_WINDOW

        teacher = TeacherModel(LIN_WINDOW, LIN_HORIZON, hidden_dim=16, steps=10,
                               seed=4, dropout_p=0.0)
        from sohcast.distillation import train_teacher

        for epochs, lr in [(120, 3e-3), (60, 3e-4), (60, 1e-4)]:
            train_teacher(teacher, linear_decay_split.train, epochs=epochs, lr=lr,
                          seed=4)
        X, Y = stack_windows(linear_decay_split.test)
        mae = np.abs(model_forward(teacher, X) - Y).mean()
        assert mae < 5e-3


class TestCounts:
    def test_dense_dynamics_param_count(self):
        t = TeacherModel(8, 4, hidden_dim=128, steps=2, seed=0)
        assert t.dynamics_param_count() == 128 * 128 == 16384

    def test_lowrank_dynamics_param_count(self):
        s = StudentModel(8, 4, hidden_dim=128, rank=4, seed=0)
        assert s.dynamics_param_count() == 128 + 2 * 128 * 4 == 1152
        # 1152/16384 = 7.03%, i.e. a 92.97% ~ 93% reduction vs dense
        assert 1 - 1152 / 16384 >= 0.9296

    def test_smallest_student(self):
        s = StudentModel(8, 4, hidden_dim=2, rank=4, seed=0)
        assert s.rank == 1  # clamped to d-1
        assert s.dynamics_param_count() == 2 + 2 * 2 * 1 == 6

    def test_count_params_exact(self):
        s = StudentModel(8, 4, hidden_dim=4, rank=2, seed=0)
        manual = sum(p.data.size for p in s.params())
        assert s.count_params() == manual

    def test_dynamics_flops_quadratic_in_d(self):
        # dynamics-dominated: window/horizon tiny relative to d
        f = []
        for d in (64, 128):
            t = TeacherModel(4, 2, hidden_dim=d, enc_width=4, dec_width=4, dec_mid=4,
                             steps=20, seed=0)
            base = TeacherModel(4, 2, hidden_dim=d, enc_width=4, dec_width=4,
                                dec_mid=4, steps=20, seed=0)._coder_flops()
            f.append(t.count_flops() - base)
        assert 3.5 <= f[1] / f[0] <= 4.5

    def test_power_of_two_enforced(self):
        with pytest.raises(ConfigError):
            StudentModel(8, 4, hidden_dim=6, seed=0)


class TestOpenQuestionSensitivity:
    def test_alpha_beta_trainable_from_teacher_init(self, toy_teacher, toy_split):
        """Students start from the teacher's alpha/beta and may move them."""
        s = StudentModel(TOY_WINDOW, TOY_HORIZON, hidden_dim=4, seed=9,
                         alpha_init=float(toy_teacher.alpha.data),
                         beta_init=float(toy_teacher.beta.data))
        assert float(s.alpha.data) == float(toy_teacher.alpha.data)
        cfg = DistillConfig(epochs=3, distill_kind=DistillKind.MSE, lambda_step=0.3)
        train_student(toy_teacher, s, toy_split.train[:40], cfg, seed=9)
        assert float(s.alpha.data) != float(toy_teacher.alpha.data)
