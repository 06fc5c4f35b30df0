import numpy as np
import pytest

from sohcast.compression import (apply_mask, magnitude_prune, masked_grad_apply,
                                 prune_variants, pruned_zero_count)
from sohcast.distillation import DistillConfig, DistillKind, train_student
from sohcast.errors import ConfigError
from sohcast.models import StudentModel
from tests.conftest import TOY_HORIZON, TOY_WINDOW


def small_student(seed=3):
    return StudentModel(TOY_WINDOW, TOY_HORIZON, hidden_dim=8, seed=seed)


class TestMagnitudePrune:
    def test_zero_sparsity_identity(self):
        m = small_student()
        pruned, mask = magnitude_prune(m, 0.0)
        assert pruned.checksum() == m.checksum()
        assert mask.zero_count() == 0

    def test_hand_ranked_tensor(self):
        m = small_student()
        # put a known pattern into one tensor and neutralize the others
        for p in m.prunable_params():
            p.data[:] = 10.0
        m.w_diag.data[:4] = np.array([0.1, -0.5, 0.3, -0.2], np.float32)
        total = sum(p.data.size for p in m.prunable_params())
        s = 2.0 / total  # prune exactly the two smallest magnitudes
        pruned, _ = magnitude_prune(m, s)
        np.testing.assert_allclose(pruned.w_diag.data[:4], [0.0, -0.5, 0.3, 0.0])

    def test_exact_counts(self):
        m = small_student()
        total = sum(p.data.size for p in m.prunable_params())
        for s in np.arange(0.1, 1.0, 0.1):
            pruned, mask = magnitude_prune(m, float(s))
            expect = int(np.floor(s * total))
            assert mask.zero_count() == expect
            assert pruned_zero_count(pruned) == expect

    def test_monotone_containment(self):
        m = small_student()
        zero_sets = []
        for s in (0.2, 0.5, 0.8):
            _, mask = magnitude_prune(m, s)
            flat = np.concatenate([v.ravel() for v in mask.masks.values()])
            zero_sets.append(set(np.flatnonzero(flat == 0)))
        assert zero_sets[0] <= zero_sets[1] <= zero_sets[2]

    def test_non_prunable_untouched(self):
        m = small_student()
        before = {p.name: p.data.copy() for p in m.params()}
        pruned, mask = magnitude_prune(m, 0.7)
        prunable = set(mask.masks)
        for p in pruned.params():
            if p.name not in prunable:
                np.testing.assert_array_equal(p.data, before[p.name])

    def test_sparsity_validated(self):
        with pytest.raises(ConfigError):
            magnitude_prune(small_student(), 1.0)

    def test_interface_unchanged(self):
        m = small_student()
        pruned, _ = magnitude_prune(m, 0.5)
        assert (pruned.window, pruned.horizon) == (m.window, m.horizon)


class TestMaskedGrads:
    def test_all_ones_mask_keeps_grads(self):
        m = small_student()
        _, mask = magnitude_prune(m, 0.0)
        for p in m.prunable_params():
            p.grad = np.ones_like(p.data)
        masked_grad_apply(m, mask)
        for p in m.prunable_params():
            np.testing.assert_array_equal(p.grad, np.ones_like(p.data))

    def test_all_zeros_mask_kills_grads(self):
        m = small_student()
        _, mask = magnitude_prune(m, 0.0)
        for name in mask.masks:
            mask.masks[name][:] = 0
        for p in m.prunable_params():
            p.grad = np.ones_like(p.data)
        masked_grad_apply(m, mask)
        for p in m.prunable_params():
            np.testing.assert_array_equal(p.grad, np.zeros_like(p.data))

    def test_zeros_persist_through_masked_distillation(self, toy_teacher, toy_split):
        pruned, mask = magnitude_prune(small_student(seed=8), 0.5)
        expect = mask.zero_count()
        cfg = DistillConfig(epochs=20, lambda_step=0.04, distill_kind=DistillKind.MSE)
        rec = train_student(toy_teacher, pruned, toy_split.train, cfg, seed=8,
                            mask=mask)
        assert rec.status == "trained"
        assert pruned_zero_count(pruned) == expect
        # every masked position is exactly zero, not merely small
        for p in pruned.prunable_params():
            assert np.all(p.data[mask.masks[p.name] == 0] == 0.0)

    def test_apply_mask_rezeros(self):
        pruned, mask = magnitude_prune(small_student(), 0.4)
        pruned.U.data += 1.0  # simulate an unmasked update
        apply_mask(pruned, mask)
        assert np.all(pruned.U.data[mask.masks["U"] == 0] == 0.0)


class TestPruneVariants:
    def test_default_nine_levels(self):
        variants = prune_variants(small_student(), [0.1, 0.2, 0.3, 0.4, 0.5,
                                                    0.6, 0.7, 0.8, 0.9])
        assert len(variants) == 9

    def test_stage2_candidate_arithmetic(self):
        elites = [small_student(seed=i) for i in range(3)]
        candidates = [(e, v) for e in elites
                      for v in prune_variants(e, np.arange(0.1, 1.0, 0.1))]
        assert len(candidates) == 27  # before the loss-kind doubling
        assert len(candidates) * 2 == 54

    def test_empty_list(self):
        assert prune_variants(small_student(), []) == []

    def test_variants_independent(self):
        m = small_student()
        variants = prune_variants(m, [0.2, 0.8])
        variants[0][1].U.data[:] = 7.0
        assert not np.any(variants[1][1].U.data == 7.0)
        assert pruned_zero_count(m) == 0  # source untouched
